#include "fairboost/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fairboost/dataset.hpp"
#include "fairboost/error.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;

double sigmoid(double margin) {
  if (margin >= 0.0) {
    return 1.0 / (1.0 + std::exp(-margin));
  }
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

namespace {

constexpr double kProbEps = 1e-12;

double clamp_prob(double p) { return std::min(1.0 - kProbEps, std::max(kProbEps, p)); }

void validate_config(const TrainConfig& cfg) {
  if (cfg.rounds < 1) throw_invalid("TrainConfig: rounds must be >= 1");
  if (cfg.max_depth < 1) throw_invalid("TrainConfig: max_depth must be >= 1");
  if (cfg.l2_leaf_reg < 0.0) throw_invalid("TrainConfig: l2_leaf_reg must be >= 0");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0))
    throw_invalid("TrainConfig: learning_rate must lie in (0, 1]");
}

}  // namespace

void logloss_grad_hess(std::span<const double> p_hat, std::span<const std::int8_t> y,
                       std::vector<double>& grad, std::vector<double>& hess) {
  if (p_hat.size() != y.size())
    throw_invalid("logloss_grad_hess: prediction/label length mismatch");
  grad.resize(p_hat.size());
  hess.resize(p_hat.size());
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double p = clamp_prob(p_hat[i]);
    grad[i] = p - double(y[i]);
    hess[i] = std::max(p * (1.0 - p), kProbEps);
  }
}

double mean_logloss(std::span<const double> p_hat, std::span<const std::int8_t> y) {
  if (p_hat.size() != y.size()) throw_invalid("mean_logloss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double p = clamp_prob(p_hat[i]);
    sum += y[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / double(p_hat.size());
}

double Tree::evaluate(std::span<const double> x) const {
  int n = 0;
  while (!nodes[n].is_leaf)
    n = (x[nodes[n].feature] < nodes[n].threshold) ? nodes[n].left : nodes[n].right;
  return nodes[n].value;
}

double Tree::expected_value() const {
  double weighted = 0.0;
  for (const auto& n : nodes)
    if (n.is_leaf) weighted += n.value * n.cover;
  return nodes.empty() || nodes[0].cover <= 0.0 ? 0.0 : weighted / nodes[0].cover;
}

namespace {

int depth_below(const Tree& t, int node) {
  if (t.nodes[node].is_leaf) return 0;
  return 1 + std::max(depth_below(t, t.nodes[node].left), depth_below(t, t.nodes[node].right));
}

void preorder_copy(const std::vector<TreeNode>& src, int node, std::vector<TreeNode>& dst) {
  const int id = static_cast<int>(dst.size());
  dst.push_back(src[node]);
  if (!src[node].is_leaf) {
    dst[id].left = static_cast<int>(dst.size());
    preorder_copy(src, src[node].left, dst);
    dst[id].right = static_cast<int>(dst.size());
    preorder_copy(src, src[node].right, dst);
  }
}

bool nodes_equal(const TreeNode& a, const TreeNode& b) {
  return a.is_leaf == b.is_leaf && a.feature == b.feature && a.threshold == b.threshold &&
         a.left == b.left && a.right == b.right && a.value == b.value && a.cover == b.cover;
}

}  // namespace

int Tree::max_depth() const { return nodes.empty() ? 0 : depth_below(*this, 0); }

bool TreeEnsemble::operator==(const TreeEnsemble& o) const {
  if (learning_rate != o.learning_rate || base_margin != o.base_margin ||
      num_features != o.num_features || trees.size() != o.trees.size())
    return false;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    if (trees[t].nodes.size() != o.trees[t].nodes.size()) return false;
    for (std::size_t n = 0; n < trees[t].nodes.size(); ++n)
      if (!nodes_equal(trees[t].nodes[n], o.trees[t].nodes[n])) return false;
  }
  return true;
}

Tree fit_tree(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
              const TrainConfig& cfg) {
  const std::size_t m = X.rows();
  const std::size_t d = X.cols();
  if (grad.size() != m || hess.size() != m)
    throw_invalid("fit_tree: gradient/hessian length does not match row count");
  if (m == 0) throw_invalid("fit_tree: empty input");

  // Indices sorted once per feature; value ties break by row index so the
  // whole scan is deterministic.
  std::vector<std::vector<std::size_t>> sorted_idx(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& idx = sorted_idx[f];
    idx.resize(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
      const double vi = X(i, f), vj = X(j, f);
      return vi < vj || (vi == vj && i < j);
    });
  }

  struct NodeStats {
    double g = 0.0, h = 0.0;
  };
  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double g_left = 0.0, h_left = 0.0;
    double cover_left = 0.0;
  };

  Tree tree;
  std::vector<NodeStats> stats;
  double g_root = 0.0, h_root = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    g_root += grad[i];
    h_root += hess[i];
  }
  const double reg = cfg.l2_leaf_reg;
  tree.nodes.push_back(
      {true, -1, 0.0, -1, -1, -g_root / (h_root + reg), static_cast<double>(m)});
  stats.push_back({g_root, h_root});

  std::vector<int> pos(m, 0);  // current leaf of each row
  std::vector<int> active{0};

  for (int depth = 0; depth < cfg.max_depth && !active.empty(); ++depth) {
    const std::size_t n_nodes = tree.nodes.size();
    std::vector<Candidate> best(n_nodes);
    std::vector<char> is_active(n_nodes, 0);
    for (const int n : active) is_active[n] = 1;

    // One pass per feature over the presorted rows, accumulating per-node
    // prefix sums; a boundary between distinct values yields a candidate.
    std::vector<double> run_g(n_nodes), run_h(n_nodes), run_cover(n_nodes), prev_val(n_nodes);
    std::vector<char> has_prev(n_nodes);
    for (std::size_t f = 0; f < d; ++f) {
      std::fill(run_g.begin(), run_g.end(), 0.0);
      std::fill(run_h.begin(), run_h.end(), 0.0);
      std::fill(run_cover.begin(), run_cover.end(), 0.0);
      std::fill(has_prev.begin(), has_prev.end(), 0);

      for (const std::size_t i : sorted_idx[f]) {
        const int n = pos[i];
        if (!is_active[n]) continue;
        const double v = X(i, f);
        if (has_prev[n] && v > prev_val[n]) {
          const double thr = 0.5 * (prev_val[n] + v);
          if (prev_val[n] < thr) {  // guards against midpoint underflow at adjacent doubles
            const double gl = run_g[n], hl = run_h[n], cl = run_cover[n];
            const double gr = stats[n].g - gl, hr = stats[n].h - hl;
            const double cr = tree.nodes[n].cover - cl;
            if (cl >= cfg.min_child_cover && cr >= cfg.min_child_cover) {
              const double gain = 0.5 * (gl * gl / (hl + reg) + gr * gr / (hr + reg) -
                                         stats[n].g * stats[n].g / (stats[n].h + reg));
              if (gain > best[n].gain) best[n] = {gain, static_cast<int>(f), thr, gl, hl, cl};
            }
          }
        }
        run_g[n] += grad[i];
        run_h[n] += hess[i];
        run_cover[n] += 1.0;
        prev_val[n] = v;
        has_prev[n] = 1;
      }
    }

    std::vector<int> next_active;
    std::vector<char> splitting(n_nodes, 0);
    for (const int n : active) {
      const Candidate& c = best[n];
      if (c.feature < 0 || !(c.gain > 0.0)) continue;
      splitting[n] = 1;

      const double gr = stats[n].g - c.g_left;
      const double hr = stats[n].h - c.h_left;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(
          {true, -1, 0.0, -1, -1, -c.g_left / (c.h_left + reg), c.cover_left});
      stats.push_back({c.g_left, c.h_left});
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(
          {true, -1, 0.0, -1, -1, -gr / (hr + reg), tree.nodes[n].cover - c.cover_left});
      stats.push_back({gr, hr});

      auto& node = tree.nodes[n];
      node.is_leaf = false;
      node.feature = c.feature;
      node.threshold = c.threshold;
      node.left = left;
      node.right = right;
      node.value = 0.0;
      next_active.push_back(left);
      next_active.push_back(right);
    }

    for (std::size_t i = 0; i < m; ++i) {
      const int n = pos[i];
      if (n < static_cast<int>(n_nodes) && splitting[n]) {
        const auto& node = tree.nodes[n];
        pos[i] = (X(i, node.feature) < node.threshold) ? node.left : node.right;
      }
    }
    active = std::move(next_active);
  }

  // Canonical pre-order layout so structurally identical trees compare and
  // serialize identically.
  Tree out;
  out.nodes.reserve(tree.nodes.size());
  preorder_copy(tree.nodes, 0, out.nodes);
  return out;
}

TreeEnsemble boost(const Matrix& X, const TrainConfig& cfg, const GradientProvider& grads,
                   const RoundObserver& observer) {
  validate_config(cfg);
  const std::size_t m = X.rows();
  if (m == 0) throw_invalid("boost: empty training matrix");

  TreeEnsemble model;
  model.learning_rate = cfg.learning_rate;
  model.base_margin = 0.0;
  model.num_features = X.cols();
  model.trees.reserve(cfg.rounds);

  std::vector<double> margins(m, model.base_margin);
  std::vector<double> g, h;
  for (int round = 0; round < cfg.rounds; ++round) {
    grads(margins, g, h);
    Tree tree = fit_tree(X, g, h, cfg);
    for (std::size_t i = 0; i < m; ++i)
      margins[i] += cfg.learning_rate * tree.evaluate(X.row(i));
    model.trees.push_back(std::move(tree));
    if (observer) observer(round, margins);
  }
  return model;
}

void logistic_mean_grad_hess(const std::vector<double>& margins,
                             std::span<const std::int8_t> y, std::vector<double>& grad,
                             std::vector<double>& hess) {
  const double inv_m = 1.0 / double(margins.size());
  grad.resize(margins.size());
  hess.resize(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double p = clamp_prob(sigmoid(margins[i]));
    grad[i] = (p - double(y[i])) * inv_m;
    hess[i] = std::max(p * (1.0 - p), kProbEps) * inv_m;
  }
}

TreeEnsemble train_baseline(const Dataset& train, const TrainConfig& cfg) {
  if (!train.preprocessed) throw_data("train_baseline: dataset must be preprocessed");
  const auto& y = train.y;
  return boost(train.X, cfg,
               [&y](const std::vector<double>& margins, std::vector<double>& g,
                    std::vector<double>& h) { logistic_mean_grad_hess(margins, y, g, h); });
}

std::vector<double> predict_margin(const TreeEnsemble& model, const Matrix& X) {
  if (X.cols() != model.num_features)
    throw_data("predict_margin: feature count mismatch (model " +
               std::to_string(model.num_features) + ", data " + std::to_string(X.cols()) + ")");
  std::vector<double> margins(X.rows(), model.base_margin);
  for (const auto& tree : model.trees)
    for (std::size_t i = 0; i < X.rows(); ++i)
      margins[i] += model.learning_rate * tree.evaluate(X.row(i));
  return margins;
}

std::vector<double> predict_proba(const TreeEnsemble& model, const Matrix& X) {
  auto margins = predict_margin(model, X);
  for (auto& v : margins) v = sigmoid(v);
  return margins;
}

namespace {

void write_node_preorder(const Tree& t, int n, std::ostream& os) {
  const auto& node = t.nodes[n];
  if (node.is_leaf) {
    os << "leaf " << format_g17(node.value) << " " << format_g17(node.cover) << "\n";
  } else {
    os << "split " << node.feature << " " << format_g17(node.threshold) << " "
       << format_g17(node.cover) << "\n";
    write_node_preorder(t, node.left, os);
    write_node_preorder(t, node.right, os);
  }
}

int read_node(std::istream& is, Tree& t) {
  std::string kind;
  if (!(is >> kind)) throw_data("model file: truncated tree block");
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (kind == "leaf") {
    double value, cover;
    if (!(is >> value >> cover)) throw_data("model file: malformed leaf node");
    t.nodes[id] = {true, -1, 0.0, -1, -1, value, cover};
  } else if (kind == "split") {
    int feature;
    double threshold, cover;
    if (!(is >> feature >> threshold >> cover))
      throw_data("model file: malformed split node");
    t.nodes[id] = {false, feature, threshold, -1, -1, 0.0, cover};
    t.nodes[id].left = read_node(is, t);
    t.nodes[id].right = read_node(is, t);
  } else {
    throw_data("model file: unknown node kind '" + kind + "'");
  }
  return id;
}

}  // namespace

void write_model(const TreeEnsemble& model, std::ostream& os) {
  os << "fairboost model v1\n";
  os << "learning_rate " << format_g17(model.learning_rate) << "\n";
  os << "base_margin " << format_g17(model.base_margin) << "\n";
  os << "num_features " << model.num_features << "\n";
  os << "num_trees " << model.trees.size() << "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    os << "tree " << t << " " << model.trees[t].nodes.size() << "\n";
    if (!model.trees[t].nodes.empty()) write_node_preorder(model.trees[t], 0, os);
  }
}

TreeEnsemble read_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "fairboost model v1")
    throw_data("model file: unsupported header '" + line + "'");

  TreeEnsemble model;
  std::string key;
  std::size_t num_trees = 0;
  is >> key >> model.learning_rate;
  if (key != "learning_rate") throw_data("model file: expected learning_rate");
  is >> key >> model.base_margin;
  if (key != "base_margin") throw_data("model file: expected base_margin");
  is >> key >> model.num_features;
  if (key != "num_features") throw_data("model file: expected num_features");
  is >> key >> num_trees;
  if (key != "num_trees") throw_data("model file: expected num_trees");
  if (!is) throw_data("model file: malformed header block");

  model.trees.resize(num_trees);
  for (std::size_t t = 0; t < num_trees; ++t) {
    std::size_t index = 0, node_count = 0;
    is >> key >> index >> node_count;
    if (!is || key != "tree" || index != t) throw_data("model file: malformed tree header");
    model.trees[t].nodes.reserve(node_count);
    read_node(is, model.trees[t]);
    if (model.trees[t].nodes.size() != node_count)
      throw_data("model file: tree node count mismatch");
  }
  return model;
}

void save_model(const TreeEnsemble& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write model file: " + path);
  write_model(model, out);
  if (!out) throw_io("failed writing model file: " + path);
}

TreeEnsemble load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open model file: " + path);
  return read_model(in);
}

}  // namespace fairboost
