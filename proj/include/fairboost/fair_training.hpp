#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairboost/dataset.hpp"
#include "fairboost/gbt.hpp"

namespace fairboost {

// Penalty configuration theta = (lambda, w1, w2, w3). The soft surrogate is
// always used during training; reporting goes through hard-mode snapshots.
struct FairnessConfig {
  double lambda = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;

  void validate() const;
};

// Mean binary cross-entropy plus lambda times the soft fairness penalty.
double total_loss(std::span<const double> p_hat, std::span<const std::int8_t> y,
                  std::span<const std::int8_t> a, const FairnessConfig& cfg);

// Analytic per-instance gradient of lambda * L_fair(soft) with respect to the
// margins f_i, chained through sigma'(f_i):
//  - |SPD| term: sign(SPD_soft) * (+1/m1 for a=1, -1/m0 for a=0) * sigma'(f_i)
//  - Theil term: derivative of the sum form through both p_i and the mean
//  - Wasserstein term: subgradient of the quantile-grid surrogate; each grid
//    point's sign is distributed onto the two interpolating samples per group,
//    zero at exact ties.
std::vector<double> fairness_gradient(std::span<const double> margins,
                                      std::span<const std::int8_t> a,
                                      const FairnessConfig& cfg);

// One row per boosting round, written to the audit trace CSV.
struct RoundTrace {
  int round = 0;
  double logloss = 0.0;
  double fairness_loss = 0.0;  // soft, unweighted by lambda
  double spd_soft = 0.0;
  double theil = 0.0;
  double wasserstein_soft = 0.0;
  double total_loss = 0.0;
};

// Fairness-aware boosting: per round g_i = (p_i - y_i)/m + fairness_gradient_i
// with the logistic hessian; otherwise the baseline loop. With lambda = 0 the
// result is bit-identical to train_baseline.
TreeEnsemble train_fair(const Dataset& train, const TrainConfig& tcfg,
                        const FairnessConfig& fcfg,
                        std::vector<RoundTrace>* trace = nullptr);

void write_trace_csv(const std::vector<RoundTrace>& trace, const std::string& path);

}  // namespace fairboost
