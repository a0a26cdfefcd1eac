#include "fairboost/fair_training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fairboost/error.hpp"
#include "fairboost/fairness.hpp"
#include "text_util.hpp"
#include "training_detail.hpp"

namespace fairboost {

using detail::format_g17;

void FairnessConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw_invalid("FairnessConfig: lambda must be finite and >= 0");
  for (const double w : {w1, w2, w3})
    if (!(w >= 0.0) || !std::isfinite(w))
      throw_invalid("FairnessConfig: weights must be finite and >= 0");
}

double total_loss(std::span<const double> p_hat, std::span<const std::int8_t> y,
                  std::span<const std::int8_t> a, const FairnessConfig& cfg) {
  cfg.validate();
  const double log_part = mean_logloss(p_hat, y);
  if (cfg.lambda == 0.0) return log_part;
  const GroupView view(p_hat, a);
  return log_part + cfg.lambda * fairness_loss(view, cfg.w1, cfg.w2, cfg.w3, MetricMode::soft);
}

namespace {

struct SortedGroup {
  std::vector<double> values;        // sorted probabilities
  std::vector<std::size_t> indices;  // original instance index per sorted slot
};

SortedGroup sort_group(std::span<const double> p, std::span<const std::int8_t> a, int group) {
  SortedGroup out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (a[i] == group) out.indices.push_back(i);
  std::sort(out.indices.begin(), out.indices.end(),
            [&](std::size_t i, std::size_t j) { return p[i] < p[j] || (p[i] == p[j] && i < j); });
  out.values.reserve(out.indices.size());
  for (const auto i : out.indices) out.values.push_back(p[i]);
  return out;
}

struct QuantilePos {
  std::size_t lo, hi;
  double frac;
};

QuantilePos quantile_pos(std::size_t n, double t) {
  if (n == 1) return {0, 0, 0.0};
  const double pos = t * double(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  return {lo, std::min(lo + 1, n - 1), pos - double(lo)};
}

double interp(const SortedGroup& g, const QuantilePos& q) {
  return (1.0 - q.frac) * g.values[q.lo] + q.frac * g.values[q.hi];
}

}  // namespace

std::vector<double> fairness_gradient(std::span<const double> margins,
                                      std::span<const std::int8_t> a,
                                      const FairnessConfig& cfg) {
  cfg.validate();
  if (margins.size() != a.size()) throw_invalid("fairness_gradient: length mismatch");
  const std::size_t m = margins.size();

  std::size_t m0 = 0, m1 = 0;
  for (const auto g : a) (g == 1 ? m1 : m0) += 1;
  if (m0 == 0 || m1 == 0) throw_data("fairness_gradient: a sensitive group is empty");

  std::vector<double> grad(m, 0.0);
  if (cfg.lambda == 0.0) return grad;

  std::vector<double> p(m), dp(m);  // probabilities and sigma'(f_i)
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = sigmoid(margins[i]);
    dp[i] = p[i] * (1.0 - p[i]);
  }

  // d|SPD_soft|/dp_i = sign(SPD_soft) * (+1/m1 | -1/m0)
  if (cfg.w1 != 0.0) {
    double mean0 = 0.0, mean1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) (a[i] == 1 ? mean1 : mean0) += p[i];
    mean0 /= double(m0);
    mean1 /= double(m1);
    const double diff = mean1 - mean0;
    const double sign = (diff > 0.0) - (diff < 0.0);
    if (sign != 0.0) {
      for (std::size_t i = 0; i < m; ++i) {
        const double dir = (a[i] == 1) ? sign / double(m1) : -sign / double(m0);
        grad[i] += cfg.lambda * cfg.w1 * dir * dp[i];
      }
    }
  }

  // dTheil/dp_k = (ln(p_k/pbar) - T/m) / pbar, through the mean as well.
  if (cfg.w2 != 0.0) {
    double pbar = 0.0;
    for (const double v : p) pbar += v;
    pbar /= double(m);
    double t_sum = 0.0;
    for (const double v : p) {
      const double r = v / pbar;
      t_sum += r * std::log(r);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double dtheil = (std::log(p[i] / pbar) - t_sum / double(m)) / pbar;
      grad[i] += cfg.lambda * cfg.w2 * dtheil * dp[i];
    }
  }

  // Quantile-grid Wasserstein subgradient: each grid point contributes
  // sign(q1 - q0)/Q to the two interpolating samples of each group
  // (positively for group 1, negatively for group 0); ties contribute 0.
  if (cfg.w3 != 0.0) {
    const SortedGroup g0 = sort_group(p, a, 0);
    const SortedGroup g1 = sort_group(p, a, 1);
    const int grid = kQuantileGridPoints;
    const double inv_grid = 1.0 / double(grid);
    for (int k = 0; k < grid; ++k) {
      const double t = double(k) / double(grid - 1);
      const QuantilePos q0 = quantile_pos(g0.values.size(), t);
      const QuantilePos q1 = quantile_pos(g1.values.size(), t);
      const double diff = interp(g1, q1) - interp(g0, q0);
      const double sign = (diff > 0.0) - (diff < 0.0);
      if (sign == 0.0) continue;
      const double w = cfg.lambda * cfg.w3 * sign * inv_grid;
      grad[g1.indices[q1.lo]] += w * (1.0 - q1.frac) * dp[g1.indices[q1.lo]];
      if (q1.hi != q1.lo) grad[g1.indices[q1.hi]] += w * q1.frac * dp[g1.indices[q1.hi]];
      grad[g0.indices[q0.lo]] -= w * (1.0 - q0.frac) * dp[g0.indices[q0.lo]];
      if (q0.hi != q0.lo) grad[g0.indices[q0.hi]] -= w * q0.frac * dp[g0.indices[q0.hi]];
    }
  }

  return grad;
}

TreeEnsemble train_fair(const Dataset& train, const TrainConfig& tcfg,
                        const FairnessConfig& fcfg, std::vector<RoundTrace>* trace) {
  if (!train.preprocessed) throw_data("train_fair: dataset must be preprocessed");
  fcfg.validate();
  const auto& y = train.y;
  const auto& a = train.a;
  if (fcfg.lambda != 0.0 && (train.group_count(0) == 0 || train.group_count(1) == 0))
    throw_data("train_fair: both sensitive groups must be present");

  GradientProvider provider = [&](const std::vector<double>& margins, std::vector<double>& g,
                                  std::vector<double>& h) {
    logistic_mean_grad_hess(margins, y, g, h);
    if (fcfg.lambda == 0.0) return;  // exact reduction to the baseline loop
    const auto fair = fairness_gradient(margins, a, fcfg);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += fair[i];
  };

  RoundObserver observer = nullptr;
  if (trace) {
    trace->clear();
    trace->reserve(tcfg.rounds);
    observer = [&](int round, const std::vector<double>& margins) {
      RoundTrace row;
      row.round = round;
      std::vector<double> p(margins.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(margins[i]);
      row.logloss = mean_logloss(p, y);
      const GroupView view(p, a);
      row.spd_soft = spd(view, MetricMode::soft);
      row.theil = theil(p);
      std::vector<double> p0, p1;
      for (std::size_t i = 0; i < p.size(); ++i) (a[i] == 1 ? p1 : p0).push_back(p[i]);
      row.wasserstein_soft = wasserstein_quantile_grid(p0, p1);
      row.fairness_loss = fcfg.w1 * std::abs(row.spd_soft) + fcfg.w2 * row.theil +
                          fcfg.w3 * row.wasserstein_soft;
      row.total_loss = row.logloss + fcfg.lambda * row.fairness_loss;
      trace->push_back(row);
    };
  }

  return boost(train.X, tcfg, provider, observer);
}

void write_trace_csv(const std::vector<RoundTrace>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write trace file: " + path);
  out << "round,logloss,fairness_loss,spd_soft,theil,wasserstein_soft,total_loss\n";
  for (const auto& row : trace) {
    out << row.round << "," << format_g17(row.logloss) << "," << format_g17(row.fairness_loss)
        << "," << format_g17(row.spd_soft) << "," << format_g17(row.theil) << ","
        << format_g17(row.wasserstein_soft) << "," << format_g17(row.total_loss) << "\n";
  }
  if (!out) throw_io("failed writing trace file: " + path);
}

}  // namespace fairboost
