#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fairboost/dataset.hpp"
#include "fairboost/fair_training.hpp"
#include "fairboost/gbt.hpp"

namespace fairboost {

// Search space for theta = (lambda, w1, w2, w3). Internally every dimension
// lives in the unit cube; lambda maps log-scale, the weights map linearly.
struct SearchSpace {
  double lambda_lo = 1e-3;
  double lambda_hi = 1e+2;
  double alpha = 0.5;  // objective mix: alpha*AUC - (1-alpha)*L_fair
  int budget = 25;     // total evaluations K
  int init_points = 8;
  std::uint64_t seed = 0;

  void validate() const;
  FairnessConfig to_config(const std::array<double, 4>& unit) const;
  std::array<double, 4> to_unit(const FairnessConfig& cfg) const;
};

struct Trial {
  std::array<double, 4> theta{};  // unit-cube coordinates
  double j_value = 0.0;
  double mean_auc = 0.0;
  double mean_fair_loss = 0.0;
  struct FoldScore {
    double auc = 0.0;
    double fair_loss = 0.0;
    bool fair_loss_valid = true;  // false when a fold lacked one group
  };
  std::vector<FoldScore> fold_scores;
};

// Gaussian-process surrogate over unit-cube points with a squared-exponential
// ARD kernel plus a noise term. Observations are standardized internally.
class GpSurrogate {
 public:
  GpSurrogate();
  ~GpSurrogate();
  GpSurrogate(GpSurrogate&&) noexcept;
  GpSurrogate& operator=(GpSurrogate&&) noexcept;

  std::size_t size() const;
  // Posterior for one point; variance is clamped to >= 0.
  void posterior(const std::array<double, 4>& x, double& mean, double& variance) const;
  double noise_variance() const;

 private:
  friend GpSurrogate gp_fit(const std::vector<Trial>&, const SearchSpace&);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Fits kernel hyperparameters (per-dimension length scales, signal variance,
// noise) by maximizing the log marginal likelihood over a fixed grid plus
// seeded random restarts. The kernel matrix is jittered starting at 1e-8;
// jitter escalates to 1e-4 before a numeric failure is raised.
GpSurrogate gp_fit(const std::vector<Trial>& trials, const SearchSpace& space);

// Closed-form expected improvement for maximization under a normal posterior:
// (mu - j_best)*Phi(z) + sigma*phi(z), z = (mu - j_best)/sigma; 0 when
// sigma < 1e-12.
double expected_improvement_value(double mean, double stddev, double j_best);

double expected_improvement(const GpSurrogate& gp, const std::array<double, 4>& theta,
                            double j_best);

// Argmax of EI over 2048 seeded low-discrepancy candidates; ties break to the
// lowest candidate index, and an exact collision with an observed point is
// nudged by 1e-6.
std::array<double, 4> propose_next(const GpSurrogate& gp, const SearchSpace& space,
                                   const std::vector<Trial>& history);

// theta -> Trial; the cross-validated objective below is one provider, and
// analytic benchmarks plug in directly for tests.
using ObjectiveFn = std::function<Trial(const std::array<double, 4>&)>;

struct OptimizeResult {
  std::array<double, 4> theta_star{};
  FairnessConfig config_star;
  double j_star = 0.0;
  std::vector<Trial> history;
};

// Latin-hypercube initialization followed by EI-driven proposals, K total
// evaluations; theta* is the history argmax.
OptimizeResult optimize(const ObjectiveFn& objective, const SearchSpace& space);

// Fold index per row, stratified on (a, y) with per-cell round-robin after a
// seeded shuffle. Identical for every theta so trials share folds.
std::vector<int> cv_fold_assignment(const Dataset& d, int folds, std::uint64_t seed);

// Stratified k-fold cross-validated objective
//   J(theta) = alpha * mean(AUC) - (1 - alpha) * mean(soft L_fair).
// Fold assignment is stratified on (a, y), deterministic given `space.seed`,
// and shared across trials. A fold with a single sensitive group contributes
// AUC only and is flagged. `threads` caps parallel fold evaluation.
Trial evaluate_objective(const Dataset& train, const std::array<double, 4>& theta,
                         const TrainConfig& tcfg, const SearchSpace& space, int folds,
                         int threads = 1);

OptimizeResult optimize(const Dataset& train, const SearchSpace& space,
                        const TrainConfig& tcfg, int folds, int threads = 1);

// Columns: k, lambda, w1, w2, w3, mean_auc, mean_Lfair, J.
void write_history_csv(const std::vector<Trial>& history, const SearchSpace& space,
                       const std::string& path);

}  // namespace fairboost
