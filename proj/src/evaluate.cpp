#include "fairboost/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fairboost/error.hpp"

namespace fairboost {

double auc_roc(std::span<const double> p_hat, std::span<const std::int8_t> y) {
  if (p_hat.size() != y.size()) throw_invalid("auc_roc: length mismatch");
  const std::size_t m = p_hat.size();
  double n_pos = 0.0;
  for (const auto v : y) n_pos += v;
  const double n_neg = double(m) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    throw_data("auc_roc: undefined with a single label class");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return p_hat[i] < p_hat[j]; });

  // Mann-Whitney rank sum; ties share the average rank, which contributes
  // exactly 1/2 per tied positive-negative pair.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && p_hat[order[j]] == p_hat[order[i]]) ++j;
    const double avg_rank = 0.5 * (double(i + 1) + double(j));  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (y[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double accuracy(std::span<const double> p_hat, std::span<const std::int8_t> y,
                double threshold) {
  if (p_hat.size() != y.size()) throw_invalid("accuracy: length mismatch");
  if (p_hat.empty()) throw_invalid("accuracy: empty input");
  double correct = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i)
    correct += ((p_hat[i] >= threshold) ? 1 : 0) == y[i];
  return correct / double(p_hat.size());
}

EvalResult evaluate(std::span<const double> p_hat, std::span<const std::int8_t> y,
                    double threshold) {
  EvalResult r;
  r.auc_roc = auc_roc(p_hat, y);
  r.accuracy = accuracy(p_hat, y, threshold);
  r.threshold = threshold;
  r.m = static_cast<std::int64_t>(p_hat.size());
  return r;
}

}  // namespace fairboost
