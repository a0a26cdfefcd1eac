#include "fairboost/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairboost/error.hpp"

namespace fairboost {

namespace {

constexpr double kProbFloor = 1e-12;

std::vector<double> group_values(std::span<const double> p, std::span<const std::int8_t> a,
                                 int group) {
  std::vector<double> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (a[i] == group) out.push_back(p[i]);
  return out;
}

}  // namespace

GroupView::GroupView(std::span<const double> p, std::span<const std::int8_t> groups,
                     double thr)
    : p_hat(p), a(groups), threshold(thr) {
  if (p.size() != groups.size()) throw_invalid("GroupView: p_hat/a length mismatch");
  if (p.empty()) throw_data("GroupView: empty predictions");
  for (const auto g : groups) (g == 1 ? m1 : m0) += 1;
  if (m0 == 0 || m1 == 0) throw_data("GroupView: a sensitive group is empty");
}

double spd(const GroupView& v, MetricMode mode) {
  double sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < v.p_hat.size(); ++i) {
    const double val = (mode == MetricMode::hard)
                           ? (v.p_hat[i] >= v.threshold ? 1.0 : 0.0)
                           : v.p_hat[i];
    (v.a[i] == 1 ? sum1 : sum0) += val;
  }
  return sum1 / double(v.m1) - sum0 / double(v.m0);
}

double theil(std::span<const double> p_hat, bool normalized) {
  if (p_hat.empty()) throw_data("theil: empty predictions");
  const std::size_t m = p_hat.size();
  double mean = 0.0;
  for (const double p : p_hat) mean += std::max(p, kProbFloor);
  mean /= double(m);

  double sum = 0.0;
  for (const double p : p_hat) {
    const double r = std::max(p, kProbFloor) / mean;
    sum += r * std::log(r);
  }
  if (sum < 0.0 && sum > -1e-9) sum = 0.0;  // guard tiny negative round-off
  return normalized ? sum / double(m) : sum;
}

double wasserstein1d(std::span<const double> p_group0, std::span<const double> p_group1) {
  if (p_group0.empty() || p_group1.empty()) throw_data("wasserstein1d: empty group");

  std::vector<double> v0(p_group0.begin(), p_group0.end());
  std::vector<double> v1(p_group1.begin(), p_group1.end());
  std::sort(v0.begin(), v0.end());
  std::sort(v1.begin(), v1.end());

  // Area between the two empirical CDFs over the merged support.
  const double n0 = double(v0.size()), n1 = double(v1.size());
  std::size_t i0 = 0, i1 = 0;
  double dist = 0.0;
  double prev = std::min(v0[0], v1[0]);
  while (i0 < v0.size() || i1 < v1.size()) {
    const double t = (i0 == v0.size())  ? v1[i1]
                     : (i1 == v1.size()) ? v0[i0]
                                         : std::min(v0[i0], v1[i1]);
    dist += std::abs(double(i0) / n0 - double(i1) / n1) * (t - prev);
    while (i0 < v0.size() && v0[i0] == t) ++i0;
    while (i1 < v1.size() && v1[i1] == t) ++i1;
    prev = t;
  }
  return dist;
}

namespace {

// Empirical quantile with linear interpolation between order statistics.
double quantile_linear(const std::vector<double>& sorted, double t) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = t * double(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - double(lo);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

}  // namespace

double wasserstein_quantile_grid(std::span<const double> p_group0,
                                 std::span<const double> p_group1, int grid_points) {
  if (p_group0.empty() || p_group1.empty())
    throw_data("wasserstein_quantile_grid: empty group");
  if (grid_points < 2) throw_invalid("wasserstein_quantile_grid: need >= 2 grid points");

  std::vector<double> v0(p_group0.begin(), p_group0.end());
  std::vector<double> v1(p_group1.begin(), p_group1.end());
  std::sort(v0.begin(), v0.end());
  std::sort(v1.begin(), v1.end());

  double sum = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double t = double(k) / double(grid_points - 1);
    sum += std::abs(quantile_linear(v1, t) - quantile_linear(v0, t));
  }
  return sum / double(grid_points);
}

double fairness_loss(const GroupView& v, double w1, double w2, double w3, MetricMode mode) {
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0)
    throw_invalid("fairness_loss: weights must be nonnegative");
  double loss = w1 * std::abs(spd(v, mode)) + w2 * theil(v.p_hat);
  if (w3 != 0.0) {
    const auto g0 = group_values(v.p_hat, v.a, 0);
    const auto g1 = group_values(v.p_hat, v.a, 1);
    loss += w3 * (mode == MetricMode::hard ? wasserstein1d(g0, g1)
                                           : wasserstein_quantile_grid(g0, g1));
  }
  return loss;
}

FairnessSnapshot snapshot(const GroupView& v) {
  FairnessSnapshot s;
  const auto g0 = group_values(v.p_hat, v.a, 0);
  const auto g1 = group_values(v.p_hat, v.a, 1);
  double pos0 = 0.0, pos1 = 0.0;
  for (const double p : g0) pos0 += (p >= v.threshold);
  for (const double p : g1) pos1 += (p >= v.threshold);
  s.rate_group0 = pos0 / double(g0.size());
  s.rate_group1 = pos1 / double(g1.size());
  s.spd = s.rate_group1 - s.rate_group0;
  s.theil = theil(v.p_hat, false);
  s.theil_normalized = theil(v.p_hat, true);
  s.wasserstein = wasserstein1d(g0, g1);
  s.m0 = static_cast<std::int64_t>(v.m0);
  s.m1 = static_cast<std::int64_t>(v.m1);
  return s;
}

}  // namespace fairboost
