#include "fairboost/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "fairboost/error.hpp"
#include "fairboost/rng.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;
using detail::parse_double;
using detail::split;
using detail::trim;

int CategoryEncoder::code_of(const std::string& name) const {
  for (std::size_t i = 0; i < categories.size(); ++i)
    if (categories[i] == name) return static_cast<int>(i);
  return -1;
}

int CategoryEncoder::encode_or_add(const std::string& name) {
  const int code = code_of(name);
  if (code >= 0) return code;
  categories.push_back(name);
  return static_cast<int>(categories.size()) - 1;
}

std::size_t Dataset::group_count(int group) const {
  std::size_t n = 0;
  for (const auto v : a) n += (v == group);
  return n;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema = schema;
  out.encoders = encoders;
  out.standardizers = standardizers;
  out.preprocessed = preprocessed;
  out.X = Matrix(indices.size(), cols());
  out.y.reserve(indices.size());
  out.a.reserve(indices.size());
  out.raw_categorical.resize(raw_categorical.size());
  for (std::size_t c = 0; c < raw_categorical.size(); ++c)
    if (!raw_categorical[c].empty()) out.raw_categorical[c].reserve(indices.size());

  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    for (std::size_t c = 0; c < cols(); ++c) out.X(k, c) = X(i, c);
    out.y.push_back(y[i]);
    out.a.push_back(a[i]);
    for (std::size_t c = 0; c < raw_categorical.size(); ++c)
      if (!raw_categorical[c].empty()) out.raw_categorical[c].push_back(raw_categorical[c][i]);
  }
  return out;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw_io("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw_data("CSV file is empty: " + path);
  const auto header = split(trim(line), ',');

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<int>(i);
    return -1;
  };

  const std::size_t d = schema.columns.size();
  std::vector<int> feature_pos(d);
  for (std::size_t c = 0; c < d; ++c) {
    feature_pos[c] = find_col(schema.columns[c].name);
    if (feature_pos[c] < 0)
      throw_data("CSV header mismatch: missing column '" + schema.columns[c].name + "'");
  }
  const int label_pos = find_col(schema.label_column);
  if (label_pos < 0)
    throw_data("CSV header mismatch: missing label column '" + schema.label_column + "'");
  const int sens_pos = find_col(schema.sensitive_column);
  if (sens_pos < 0)
    throw_data("CSV header mismatch: missing sensitive column '" + schema.sensitive_column + "'");

  std::vector<double> xbuf;
  std::vector<std::int8_t> ybuf, abuf;
  std::vector<std::vector<std::string>> rawcat(d);
  std::int64_t dropped = 0;

  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto cells = split(stripped, ',');
    if (cells.size() != header.size()) {
      ++dropped;
      continue;
    }

    const std::string label_cell = trim(cells[label_pos]);
    const std::string sens_cell = trim(cells[sens_pos]);
    std::int8_t yv;
    if (label_cell == "0") {
      yv = 0;
    } else if (label_cell == "1") {
      yv = 1;
    } else {
      ++dropped;
      continue;
    }
    std::int8_t av;
    if (sens_cell == schema.sensitive_code0) {
      av = 0;
    } else if (sens_cell == schema.sensitive_code1) {
      av = 1;
    } else {
      ++dropped;
      continue;
    }

    std::vector<double> row(d, 0.0);
    std::vector<std::string> rowcat(d);
    bool ok = true;
    for (std::size_t c = 0; c < d; ++c) {
      const std::string cell = trim(cells[feature_pos[c]]);
      if (cell.empty()) {
        ok = false;
        break;
      }
      if (schema.columns[c].kind == ColumnKind::continuous) {
        const auto v = parse_double(cell);
        if (!v) {
          ok = false;
          break;
        }
        row[c] = *v;
      } else {
        rowcat[c] = cell;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }

    xbuf.insert(xbuf.end(), row.begin(), row.end());
    for (std::size_t c = 0; c < d; ++c)
      if (schema.columns[c].kind == ColumnKind::categorical) rawcat[c].push_back(rowcat[c]);
    ybuf.push_back(yv);
    abuf.push_back(av);
  }

  if (ybuf.empty()) throw_data("CSV has zero usable rows: " + path);

  Dataset out;
  out.schema = schema;
  const std::size_t m = ybuf.size();
  out.X = Matrix(m, d);
  std::memcpy(out.X.data().data(), xbuf.data(), xbuf.size() * sizeof(double));
  out.y = std::move(ybuf);
  out.a = std::move(abuf);
  out.raw_categorical = std::move(rawcat);
  out.encoders.resize(d);
  out.standardizers.resize(d);
  out.dropped_rows = dropped;
  return out;
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write CSV file: " + path);

  for (const auto& c : d.schema.columns) out << c.name << ",";
  out << d.schema.label_column << "," << d.schema.sensitive_column << "\n";

  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (!d.preprocessed && d.schema.columns[c].kind == ColumnKind::categorical &&
          c < d.raw_categorical.size() && !d.raw_categorical[c].empty()) {
        out << d.raw_categorical[c][i];
      } else {
        out << format_g17(d.X(i, c));
      }
      out << ",";
    }
    out << int(d.y[i]) << ",";
    out << (d.a[i] == 0 ? d.schema.sensitive_code0 : d.schema.sensitive_code1) << "\n";
  }
  if (!out) throw_io("failed writing CSV file: " + path);
}

namespace {

Dataset apply_preprocessing(const Dataset& d,
                            std::vector<std::optional<CategoryEncoder>> encoders,
                            std::vector<std::optional<Standardizer>> standardizers,
                            bool fitted_here) {
  Dataset out;
  out.schema = d.schema;
  out.X = d.X;
  out.y = d.y;
  out.a = d.a;
  out.dropped_rows = d.dropped_rows;
  out.warnings = d.warnings;
  out.preprocessed = true;

  const std::size_t m = d.rows();
  const std::size_t dcols = d.cols();

  for (std::size_t c = 0; c < dcols; ++c) {
    if (d.schema.columns[c].kind == ColumnKind::categorical) {
      if (!encoders[c]) throw_data("no encoder for categorical column '" +
                                   d.schema.columns[c].name + "'");
      const auto& raw = d.raw_categorical.at(c);
      if (raw.size() != m)
        throw_data("categorical column '" + d.schema.columns[c].name + "' lost raw values");
      auto& enc = *encoders[c];
      for (std::size_t i = 0; i < m; ++i) {
        int code = enc.code_of(raw[i]);
        if (code < 0) {
          if (fitted_here) {
            code = enc.encode_or_add(raw[i]);
          } else {
            code = enc.encode_or_add(raw[i]);
            out.warnings.push_back("unseen category '" + raw[i] + "' in column '" +
                                   d.schema.columns[c].name + "' assigned new code " +
                                   std::to_string(code));
          }
        }
        out.X(i, c) = static_cast<double>(code);
      }
    } else {
      if (!standardizers[c]) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += d.X(i, c);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double dv = d.X(i, c) - mean;
          var += dv * dv;
        }
        var /= static_cast<double>(m);  // population variance
        standardizers[c] = Standardizer{mean, std::sqrt(var)};
      }
      const auto& st = *standardizers[c];
      if (st.stddev == 0.0) {
        for (std::size_t i = 0; i < m; ++i) out.X(i, c) = 0.0;
        if (fitted_here)
          out.warnings.push_back("constant continuous column '" + d.schema.columns[c].name +
                                 "' standardized to zeros");
      } else {
        for (std::size_t i = 0; i < m; ++i) out.X(i, c) = (d.X(i, c) - st.mean) / st.stddev;
      }
    }
  }

  out.encoders = std::move(encoders);
  out.standardizers = std::move(standardizers);
  out.raw_categorical.assign(dcols, {});
  return out;
}

}  // namespace

Dataset preprocess(const Dataset& d) {
  if (d.preprocessed) return d;  // applying stored parameters again is the identity

  std::vector<std::optional<CategoryEncoder>> encoders(d.cols());
  std::vector<std::optional<Standardizer>> standardizers(d.cols());
  for (std::size_t c = 0; c < d.cols(); ++c) {
    if (d.schema.columns[c].kind == ColumnKind::categorical) {
      CategoryEncoder enc;
      for (const auto& v : d.raw_categorical.at(c)) enc.encode_or_add(v);
      encoders[c] = std::move(enc);
    }
  }
  return apply_preprocessing(d, std::move(encoders), std::move(standardizers), true);
}

Dataset preprocess_with(const Dataset& d,
                        const std::vector<std::optional<CategoryEncoder>>& encoders,
                        const std::vector<std::optional<Standardizer>>& standardizers) {
  if (d.preprocessed) return d;
  if (encoders.size() != d.cols() || standardizers.size() != d.cols())
    throw_invalid("preprocess_with: parameter vectors do not match column count");
  return apply_preprocessing(d, encoders, standardizers, false);
}

SplitPair stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw_invalid("test_fraction must lie in (0, 1)");
  const std::size_t m = d.rows();
  if (m < 2) throw_data("cannot split a dataset with fewer than 2 rows");

  // Cells keyed by (a, y); fall back to a-only when any occupied cell is
  // too small to stratify jointly.
  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < m; ++i) cells[(int(d.a[i]) << 1) | int(d.y[i])].push_back(i);

  bool on_label = true;
  std::string note;
  for (const auto& [key, members] : cells) {
    if (members.size() < 2) {
      on_label = false;
      note = "joint (a,y) cell too small; stratified on the sensitive attribute alone";
      break;
    }
  }
  if (!on_label) {
    cells.clear();
    for (std::size_t i = 0; i < m; ++i) cells[int(d.a[i])].push_back(i);
  }

  Rng rng(seed);
  std::vector<std::size_t> test_idx, train_idx;
  for (auto& [key, members] : cells) {
    rng.shuffle(members);
    const auto n_test =
        static_cast<std::size_t>(std::floor(test_fraction * double(members.size()) + 0.5));
    for (std::size_t k = 0; k < members.size(); ++k)
      (k < n_test ? test_idx : train_idx).push_back(members[k]);
  }
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  SplitPair pair;
  pair.train = d.subset(train_idx);
  pair.test = d.subset(test_idx);
  pair.seed = seed;
  pair.stratified_on_label = on_label;
  pair.note = note;
  return pair;
}

std::uint64_t dataset_hash(const Dataset& d) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix_bytes = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  mix_bytes(d.X.data().data(), d.X.data().size() * sizeof(double));
  mix_bytes(d.y.data(), d.y.size());
  mix_bytes(d.a.data(), d.a.size());
  return h;
}

}  // namespace fairboost
