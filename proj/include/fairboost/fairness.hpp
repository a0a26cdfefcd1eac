#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fairboost {

enum class MetricMode {
  hard,  // indicator rates at the threshold; exact distances — reporting form
  soft   // differentiable surrogates used inside training gradients
};

// Predictions paired with the sensitive attribute. Construction checks that
// both groups are nonempty.
struct GroupView {
  std::span<const double> p_hat;
  std::span<const std::int8_t> a;
  double threshold = 0.5;

  GroupView(std::span<const double> p, std::span<const std::int8_t> groups,
            double thr = 0.5);

  std::size_t m0 = 0;
  std::size_t m1 = 0;
};

// All fields measured in hard mode at one model state.
struct FairnessSnapshot {
  double spd = 0.0;
  double theil = 0.0;             // unnormalized sum form
  double theil_normalized = 0.0;  // sum / m
  double wasserstein = 0.0;
  double rate_group0 = 0.0;
  double rate_group1 = 0.0;
  std::int64_t m0 = 0;
  std::int64_t m1 = 0;
};

// Difference in positive prediction rates, group 1 minus group 0.
// Soft mode replaces indicator rates with mean predicted probabilities.
double spd(const GroupView& v, MetricMode mode);

// Information-theoretic inequality of the prediction distribution:
//   sum_i (p_i/pbar) ln(p_i/pbar),  pbar = mean(p).
// The default reported form keeps the raw sum; `normalized` divides by m.
// Probabilities are clamped to >= 1e-12 before ratios and logs.
double theil(std::span<const double> p_hat, bool normalized = false);

// Exact 1-d Wasserstein distance between two empirical distributions via the
// CDF-area formula over the merged support.
double wasserstein1d(std::span<const double> p_group0, std::span<const double> p_group1);

// Differentiable surrogate for the Wasserstein term: both groups' sorted
// values are read on a fixed Q-point quantile grid with linear interpolation
// and the mean absolute gap is taken. Deterministic and well-defined for
// unequal group sizes; the analytic subgradient in the training module
// differentiates exactly this quantity.
inline constexpr int kQuantileGridPoints = 101;
double wasserstein_quantile_grid(std::span<const double> p_group0,
                                 std::span<const double> p_group1,
                                 int grid_points = kQuantileGridPoints);

// w1*|SPD| + w2*Theil + w3*W. Hard mode uses the exact distance; soft mode
// uses the quantile-grid surrogate so the value matches what the training
// gradients descend.
double fairness_loss(const GroupView& v, double w1, double w2, double w3, MetricMode mode);

FairnessSnapshot snapshot(const GroupView& v);

}  // namespace fairboost
