#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairboost/matrix.hpp"

namespace fairboost {

// One node of a regression tree, stored flat; nodes[0] is the root.
// `cover` is the number of training rows routed through the node at fit time;
// it drives the minimum-child constraint and the conditional expectations used
// by the attribution module.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf margin contribution, unscaled by the learning rate
  double cover = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const;
  // Cover-weighted mean leaf value.
  double expected_value() const;
  int max_depth() const;
};

// Additive model: margin(x) = base_margin + learning_rate * sum_t tree_t(x).
struct TreeEnsemble {
  std::vector<Tree> trees;
  double learning_rate = 0.3;
  double base_margin = 0.0;
  std::size_t num_features = 0;

  bool operator==(const TreeEnsemble&) const;
};

struct TrainConfig {
  int rounds = 200;
  double learning_rate = 0.3;
  int max_depth = 3;
  double min_child_cover = 1.0;
  double l2_leaf_reg = 1.0;
  std::uint64_t seed = 0;
};

// Numerically stable logistic; saturates cleanly for |margin| beyond ~745.
double sigmoid(double margin);

// Per-instance logistic gradients/hessians: g_i = p_i - y_i, h_i = p_i(1-p_i)
// with probabilities clamped to [1e-12, 1-1e-12] and hessians floored at 1e-12.
void logloss_grad_hess(std::span<const double> p_hat, std::span<const std::int8_t> y,
                       std::vector<double>& grad, std::vector<double>& hess);

// Mean binary cross-entropy.
double mean_logloss(std::span<const double> p_hat, std::span<const std::int8_t> y);

// Greedy exact-split regression tree over (g, h) with gain
//   0.5 * [G_L^2/(H_L+reg) + G_R^2/(H_R+reg) - G^2/(H+reg)]
// and leaf value -G/(H+reg). Splits stop at max_depth, non-positive best gain,
// or a child cover below min_child_cover. Thresholds are midpoints between
// consecutive distinct sorted feature values; ties in gain resolve to the
// lowest feature index, then the lowest threshold.
Tree fit_tree(const Matrix& X, std::span<const double> grad, std::span<const double> hess,
              const TrainConfig& cfg);

// Computes (grad, hess) for the current margins each round. Both outputs are
// pre-sized to the instance count.
using GradientProvider =
    std::function<void(const std::vector<double>& margins, std::vector<double>& grad,
                       std::vector<double>& hess)>;

// Called after each round with the updated margins (trace hooks, loss monitors).
using RoundObserver = std::function<void(int round, const std::vector<double>& margins)>;

// Shared boosting loop: margins start at base_margin 0; each round fits a tree
// to the provided gradients and adds it with shrinkage. Fully deterministic.
TreeEnsemble boost(const Matrix& X, const TrainConfig& cfg, const GradientProvider& grads,
                   const RoundObserver& observer = nullptr);

struct Dataset;  // defined in dataset.hpp

// Baseline training: gradients/hessians of the mean logistic loss,
// g_i = (p_i - y_i)/m and h_i = p_i(1-p_i)/m floored at 1e-12. The mean
// scaling matches the penalized objective so the fairness-aware loop with a
// zero penalty reduces to this one bit for bit.
TreeEnsemble train_baseline(const Dataset& train, const TrainConfig& cfg);

std::vector<double> predict_margin(const TreeEnsemble& model, const Matrix& X);
std::vector<double> predict_proba(const TreeEnsemble& model, const Matrix& X);

// Versioned text format, one tree per block, pre-order node listing.
// Round-trips are value-exact.
void save_model(const TreeEnsemble& model, const std::string& path);
TreeEnsemble load_model(const std::string& path);
void write_model(const TreeEnsemble& model, std::ostream& os);
TreeEnsemble read_model(std::istream& is);

}  // namespace fairboost
