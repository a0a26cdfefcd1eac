#include "fairboost/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairboost/error.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;

namespace {

MetricReduction reduce(double pre, double post) {
  MetricReduction r;
  const double pre_abs = std::abs(pre);
  if (pre_abs == 0.0) {
    r.applicable = false;
    r.pct = 0.0;
  } else {
    r.pct = (pre_abs - std::abs(post)) / pre_abs * 100.0;
  }
  return r;
}

}  // namespace

ComparisonReport compare(const StageResult& pre, const StageResult& post,
                         const FairnessConfig& theta_star, const RunProvenance& provenance,
                         const std::string& cohort_name) {
  ComparisonReport r;
  r.cohort_name = cohort_name;
  r.pre = pre;
  r.post = post;
  r.theta_star = theta_star;
  r.provenance = provenance;

  r.reductions.spd = reduce(pre.snapshot.spd, post.snapshot.spd);
  r.reductions.theil = reduce(pre.snapshot.theil, post.snapshot.theil);
  r.reductions.wasserstein = reduce(pre.snapshot.wasserstein, post.snapshot.wasserstein);
  if (pre.snapshot.theil > 0.0) {
    r.reductions.theil_collapse_orders =
        std::log10(pre.snapshot.theil / std::max(post.snapshot.theil, 1e-300));
    r.reductions.theil_collapsed = r.reductions.theil_collapse_orders >= 4.0;
  }
  r.reductions.auc_drop = pre.eval.auc_roc - post.eval.auc_roc;
  return r;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

// The JSON document is emitted by hand so key order and float formatting
// (17 significant digits) are byte-stable across reruns.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& os) : os_(os) {}

  void open(const std::string& key = "") {
    comma();
    indent();
    if (!key.empty()) os_ << '"' << key << "\": ";
    os_ << "{\n";
    ++depth_;
    first_ = true;
  }
  void close() {
    --depth_;
    os_ << "\n";
    indent();
    os_ << "}";
    first_ = false;
  }
  void field(const std::string& key, double v) { raw(key, format_g17(v)); }
  void field(const std::string& key, int v) { raw(key, std::to_string(v)); }
  void field(const std::string& key, std::int64_t v) { raw(key, std::to_string(v)); }
  void field(const std::string& key, std::uint64_t v) { raw(key, std::to_string(v)); }
  void field(const std::string& key, bool v) { raw(key, v ? "true" : "false"); }
  void field(const std::string& key, const std::string& v) {
    raw(key, "\"" + json_escape(v) + "\"");
  }
  void null_field(const std::string& key) { raw(key, "null"); }

 private:
  void comma() {
    if (!first_) os_ << ",\n";
    first_ = true;
  }
  void indent() {
    for (int i = 0; i < depth_; ++i) os_ << "  ";
  }
  void raw(const std::string& key, const std::string& v) {
    comma();
    indent();
    os_ << '"' << key << "\": " << v;
    first_ = false;
  }

  std::ostream& os_;
  int depth_ = 0;
  bool first_ = true;
};

void write_snapshot(JsonWriter& w, const FairnessSnapshot& s) {
  w.open("snapshot");
  w.field("spd", s.spd);
  w.field("theil", s.theil);
  w.field("theil_normalized", s.theil_normalized);
  w.field("wasserstein", s.wasserstein);
  w.field("rate_group0", s.rate_group0);
  w.field("rate_group1", s.rate_group1);
  w.field("m0", s.m0);
  w.field("m1", s.m1);
  w.close();
}

void write_eval(JsonWriter& w, const EvalResult& e) {
  w.open("eval");
  w.field("auc_roc", e.auc_roc);
  w.field("accuracy", e.accuracy);
  w.field("threshold", e.threshold);
  w.field("m", e.m);
  w.close();
}

void write_stage(JsonWriter& w, const std::string& key, const StageResult& s) {
  w.open(key);
  write_snapshot(w, s.snapshot);
  write_eval(w, s.eval);
  w.close();
}

void write_reduction(JsonWriter& w, const std::string& name, const MetricReduction& r) {
  if (r.applicable) {
    w.field(name + "_pct", r.pct);
  } else {
    w.null_field(name + "_pct");
  }
  w.field(name + "_applicable", r.applicable);
}

}  // namespace

void emit_report(const ComparisonReport& r, const std::string& json_path,
                 const std::string& text_path) {
  {
    std::ofstream out(json_path);
    if (!out) throw_io("cannot write report: " + json_path);
    JsonWriter w(out);
    w.open();
    w.field("schema_version", r.schema_version);
    w.field("cohort", r.cohort_name);
    write_stage(w, "pre", r.pre);
    write_stage(w, "post", r.post);
    w.open("theta_star");
    w.field("lambda", r.theta_star.lambda);
    w.field("w1", r.theta_star.w1);
    w.field("w2", r.theta_star.w2);
    w.field("w3", r.theta_star.w3);
    w.close();
    w.open("reductions");
    write_reduction(w, "spd", r.reductions.spd);
    write_reduction(w, "theil", r.reductions.theil);
    write_reduction(w, "wasserstein", r.reductions.wasserstein);
    w.field("theil_collapse_orders", r.reductions.theil_collapse_orders);
    w.field("theil_collapsed", r.reductions.theil_collapsed);
    w.field("auc_drop", r.reductions.auc_drop);
    w.close();
    w.open("provenance");
    w.field("seed", r.provenance.seed);
    w.field("threshold", r.provenance.threshold);
    w.field("test_fraction", r.provenance.test_fraction);
    w.open("train");
    w.field("rounds", r.provenance.train.rounds);
    w.field("learning_rate", r.provenance.train.learning_rate);
    w.field("max_depth", r.provenance.train.max_depth);
    w.field("min_child_cover", r.provenance.train.min_child_cover);
    w.field("l2_leaf_reg", r.provenance.train.l2_leaf_reg);
    w.field("seed", r.provenance.train.seed);
    w.close();
    w.open("search_space");
    w.field("lambda_lo", r.provenance.space.lambda_lo);
    w.field("lambda_hi", r.provenance.space.lambda_hi);
    w.field("alpha", r.provenance.space.alpha);
    w.field("budget", r.provenance.space.budget);
    w.field("init_points", r.provenance.space.init_points);
    w.field("seed", r.provenance.space.seed);
    w.close();
    w.field("folds", r.provenance.folds);
    w.field("bo_used", r.provenance.bo_used);
    w.field("threads", r.provenance.threads);
    w.field("dataset_hash", r.provenance.dataset_hash);
    w.field("dataset_source", r.provenance.dataset_source);
    w.open("files");
    w.field("bo_history", r.provenance.bo_history_path);
    w.field("trace", r.provenance.trace_path);
    w.field("shap_pre", r.provenance.shap_pre_path);
    w.field("shap_post", r.provenance.shap_post_path);
    w.field("disparity_pre", r.provenance.disparity_pre_path);
    w.field("disparity_post", r.provenance.disparity_post_path);
    w.field("model_baseline", r.provenance.model_baseline_path);
    w.field("model_fair", r.provenance.model_fair_path);
    w.close();
    w.close();
    w.close();
    out << "\n";
    if (!out) throw_io("failed writing report: " + json_path);
  }
  if (!text_path.empty()) {
    std::ofstream out(text_path);
    if (!out) throw_io("cannot write report: " + text_path);
    out << render_report_text(r);
    if (!out) throw_io("failed writing report: " + text_path);
  }
}

namespace {

std::string fixed4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string pct2(const MetricReduction& r) {
  if (!r.applicable) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f%%", r.pct);
  return buf;
}

}  // namespace

std::string render_report_text(const ComparisonReport& r) {
  std::ostringstream os;
  os << "cohort: " << r.cohort_name << "\n";
  os << "theta*: lambda=" << fixed4(r.theta_star.lambda) << " w1=" << fixed4(r.theta_star.w1)
     << " w2=" << fixed4(r.theta_star.w2) << " w3=" << fixed4(r.theta_star.w3) << "\n\n";

  auto row = [&](const std::string& name, const StageResult& s) {
    os << name << "\t" << fixed4(s.snapshot.rate_group0 * 100.0) << "\t"
       << fixed4(s.snapshot.rate_group1 * 100.0) << "\t" << fixed4(s.snapshot.spd) << "\t"
       << fixed4(s.snapshot.theil) << "\t" << fixed4(s.snapshot.wasserstein) << "\t"
       << fixed4(s.eval.auc_roc) << "\t" << fixed4(s.eval.accuracy) << "\n";
  };
  os << "stage\tg0_pred%\tg1_pred%\tSPD\tTheil\tWasserstein\tAUC\taccuracy\n";
  row("pre", r.pre);
  row("post", r.post);
  os << "\n";
  os << "reductions: SPD " << pct2(r.reductions.spd) << ", Theil " << pct2(r.reductions.theil)
     << ", Wasserstein " << pct2(r.reductions.wasserstein) << "\n";
  if (r.reductions.theil_collapsed) {
    os << "theil collapse: " << fixed4(r.reductions.theil_collapse_orders)
       << " orders of magnitude\n";
  }
  os << "auc drop: " << fixed4(r.reductions.auc_drop) << "\n";
  return os.str();
}

void emit_audit_report(const StageResult& stage, const RunProvenance& provenance,
                       const std::string& cohort_name, const std::string& json_path) {
  std::ofstream out(json_path);
  if (!out) throw_io("cannot write audit report: " + json_path);
  JsonWriter w(out);
  w.open();
  w.field("schema_version", 1);
  w.field("cohort", cohort_name);
  write_stage(w, "baseline", stage);
  w.open("provenance");
  w.field("seed", provenance.seed);
  w.field("threshold", provenance.threshold);
  w.field("test_fraction", provenance.test_fraction);
  w.open("train");
  w.field("rounds", provenance.train.rounds);
  w.field("learning_rate", provenance.train.learning_rate);
  w.field("max_depth", provenance.train.max_depth);
  w.field("min_child_cover", provenance.train.min_child_cover);
  w.field("l2_leaf_reg", provenance.train.l2_leaf_reg);
  w.field("seed", provenance.train.seed);
  w.close();
  w.field("dataset_hash", provenance.dataset_hash);
  w.field("dataset_source", provenance.dataset_source);
  w.open("files");
  w.field("shap_pre", provenance.shap_pre_path);
  w.field("disparity_pre", provenance.disparity_pre_path);
  w.field("model_baseline", provenance.model_baseline_path);
  w.close();
  w.close();
  w.close();
  out << "\n";
  if (!out) throw_io("failed writing audit report: " + json_path);
}

ComparisonReport load_report(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw_io("cannot open report: " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed report JSON: " + std::string(e.what()));
  }

  try {
    ComparisonReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.cohort_name = j.at("cohort").get<std::string>();

    auto read_stage = [](const nlohmann::json& s) {
      StageResult out;
      const auto& snap = s.at("snapshot");
      out.snapshot.spd = snap.at("spd").get<double>();
      out.snapshot.theil = snap.at("theil").get<double>();
      out.snapshot.theil_normalized = snap.at("theil_normalized").get<double>();
      out.snapshot.wasserstein = snap.at("wasserstein").get<double>();
      out.snapshot.rate_group0 = snap.at("rate_group0").get<double>();
      out.snapshot.rate_group1 = snap.at("rate_group1").get<double>();
      out.snapshot.m0 = snap.at("m0").get<std::int64_t>();
      out.snapshot.m1 = snap.at("m1").get<std::int64_t>();
      const auto& ev = s.at("eval");
      out.eval.auc_roc = ev.at("auc_roc").get<double>();
      out.eval.accuracy = ev.at("accuracy").get<double>();
      out.eval.threshold = ev.at("threshold").get<double>();
      out.eval.m = ev.at("m").get<std::int64_t>();
      return out;
    };
    r.pre = read_stage(j.at("pre"));
    r.post = read_stage(j.at("post"));

    const auto& ts = j.at("theta_star");
    r.theta_star.lambda = ts.at("lambda").get<double>();
    r.theta_star.w1 = ts.at("w1").get<double>();
    r.theta_star.w2 = ts.at("w2").get<double>();
    r.theta_star.w3 = ts.at("w3").get<double>();

    const auto& red = j.at("reductions");
    auto read_reduction = [&red](const std::string& name) {
      MetricReduction mr;
      mr.applicable = red.at(name + "_applicable").get<bool>();
      mr.pct = red.at(name + "_pct").is_null() ? 0.0 : red.at(name + "_pct").get<double>();
      return mr;
    };
    r.reductions.spd = read_reduction("spd");
    r.reductions.theil = read_reduction("theil");
    r.reductions.wasserstein = read_reduction("wasserstein");
    r.reductions.theil_collapse_orders = red.at("theil_collapse_orders").get<double>();
    r.reductions.theil_collapsed = red.at("theil_collapsed").get<bool>();
    r.reductions.auc_drop = red.at("auc_drop").get<double>();

    const auto& prov = j.at("provenance");
    r.provenance.seed = prov.at("seed").get<std::uint64_t>();
    r.provenance.threshold = prov.at("threshold").get<double>();
    r.provenance.test_fraction = prov.at("test_fraction").get<double>();
    const auto& tr = prov.at("train");
    r.provenance.train.rounds = tr.at("rounds").get<int>();
    r.provenance.train.learning_rate = tr.at("learning_rate").get<double>();
    r.provenance.train.max_depth = tr.at("max_depth").get<int>();
    r.provenance.train.min_child_cover = tr.at("min_child_cover").get<double>();
    r.provenance.train.l2_leaf_reg = tr.at("l2_leaf_reg").get<double>();
    r.provenance.train.seed = tr.at("seed").get<std::uint64_t>();
    const auto& sp = prov.at("search_space");
    r.provenance.space.lambda_lo = sp.at("lambda_lo").get<double>();
    r.provenance.space.lambda_hi = sp.at("lambda_hi").get<double>();
    r.provenance.space.alpha = sp.at("alpha").get<double>();
    r.provenance.space.budget = sp.at("budget").get<int>();
    r.provenance.space.init_points = sp.at("init_points").get<int>();
    r.provenance.space.seed = sp.at("seed").get<std::uint64_t>();
    r.provenance.folds = prov.at("folds").get<int>();
    r.provenance.bo_used = prov.at("bo_used").get<bool>();
    r.provenance.threads = prov.at("threads").get<int>();
    r.provenance.dataset_hash = prov.at("dataset_hash").get<std::string>();
    r.provenance.dataset_source = prov.at("dataset_source").get<std::string>();
    const auto& files = prov.at("files");
    r.provenance.bo_history_path = files.at("bo_history").get<std::string>();
    r.provenance.trace_path = files.at("trace").get<std::string>();
    r.provenance.shap_pre_path = files.at("shap_pre").get<std::string>();
    r.provenance.shap_post_path = files.at("shap_post").get<std::string>();
    r.provenance.disparity_pre_path = files.at("disparity_pre").get<std::string>();
    r.provenance.disparity_post_path = files.at("disparity_post").get<std::string>();
    r.provenance.model_baseline_path = files.at("model_baseline").get<std::string>();
    r.provenance.model_fair_path = files.at("model_fair").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw_data("report JSON missing fields: " + std::string(e.what()));
  }
}

}  // namespace fairboost
