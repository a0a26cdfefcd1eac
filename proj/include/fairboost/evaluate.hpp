#pragma once

#include <cstdint>
#include <span>

namespace fairboost {

struct EvalResult {
  double auc_roc = 0.0;
  double accuracy = 0.0;
  double threshold = 0.5;
  std::int64_t m = 0;
};

// Rank-based AUC (Mann-Whitney) with ties contributing 1/2. Requires both
// classes present; equals brute-force pair counting exactly.
double auc_roc(std::span<const double> p_hat, std::span<const std::int8_t> y);

double accuracy(std::span<const double> p_hat, std::span<const std::int8_t> y,
                double threshold);

EvalResult evaluate(std::span<const double> p_hat, std::span<const std::int8_t> y,
                    double threshold = 0.5);

}  // namespace fairboost
