#include "fairboost/bayes_opt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "fairboost/error.hpp"
#include "fairboost/evaluate.hpp"
#include "fairboost/fairness.hpp"
#include "fairboost/rng.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;

void SearchSpace::validate() const {
  if (!(lambda_lo > 0.0 && lambda_lo < lambda_hi))
    throw_invalid("SearchSpace: need 0 < lambda_lo < lambda_hi");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw_invalid("SearchSpace: alpha must lie in (0, 1]");
  if (init_points < 2) throw_invalid("SearchSpace: init_points must be >= 2");
  if (budget < init_points) throw_invalid("SearchSpace: budget must be >= init_points");
}

FairnessConfig SearchSpace::to_config(const std::array<double, 4>& unit) const {
  FairnessConfig cfg;
  cfg.lambda = std::exp(std::log(lambda_lo) +
                        unit[0] * (std::log(lambda_hi) - std::log(lambda_lo)));
  cfg.w1 = unit[1];
  cfg.w2 = unit[2];
  cfg.w3 = unit[3];
  return cfg;
}

std::array<double, 4> SearchSpace::to_unit(const FairnessConfig& cfg) const {
  std::array<double, 4> unit{};
  unit[0] = (std::log(cfg.lambda) - std::log(lambda_lo)) /
            (std::log(lambda_hi) - std::log(lambda_lo));
  unit[1] = cfg.w1;
  unit[2] = cfg.w2;
  unit[3] = cfg.w3;
  return unit;
}

namespace {

constexpr int kDims = 4;

double kernel_corr(const std::array<double, 4>& a, const std::array<double, 4>& b,
                   const std::array<double, 4>& length_scales) {
  double s = 0.0;
  for (int d = 0; d < kDims; ++d) {
    const double r = (a[d] - b[d]) / length_scales[d];
    s += r * r;
  }
  return std::exp(-0.5 * s);
}

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / 2.5066282746310005;  // sqrt(2*pi)
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

struct HyperParams {
  std::array<double, 4> length_scales{1.0, 1.0, 1.0, 1.0};
  double signal_var = 1.0;
  double noise_var = 1e-4;
};

}  // namespace

struct GpSurrogate::Impl {
  std::vector<std::array<double, 4>> points;
  Eigen::VectorXd y_std;
  double y_mean = 0.0;
  double y_scale = 1.0;
  HyperParams hp;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;  // K^{-1} y_std
  double jitter = 1e-8;
};

GpSurrogate::GpSurrogate() : impl_(std::make_unique<Impl>()) {}
GpSurrogate::~GpSurrogate() = default;
GpSurrogate::GpSurrogate(GpSurrogate&&) noexcept = default;
GpSurrogate& GpSurrogate::operator=(GpSurrogate&&) noexcept = default;

std::size_t GpSurrogate::size() const { return impl_->points.size(); }

double GpSurrogate::noise_variance() const {
  return impl_->hp.noise_var * impl_->y_scale * impl_->y_scale;
}

void GpSurrogate::posterior(const std::array<double, 4>& x, double& mean,
                            double& variance) const {
  const auto& im = *impl_;
  const auto n = static_cast<Eigen::Index>(im.points.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k_star(i) = im.hp.signal_var * kernel_corr(x, im.points[i], im.hp.length_scales);

  const double mu_std = k_star.dot(im.alpha);
  const Eigen::VectorXd v = im.llt.matrixL().solve(k_star);
  double var_std = im.hp.signal_var - v.squaredNorm();
  if (var_std < 0.0) var_std = 0.0;

  mean = mu_std * im.y_scale + im.y_mean;
  variance = var_std * im.y_scale * im.y_scale;
}

namespace {

// Log marginal likelihood of standardized observations under the given
// hyperparameters; returns -inf when the factorization fails.
double log_marginal_likelihood(const std::vector<std::array<double, 4>>& pts,
                               const Eigen::VectorXd& y, const HyperParams& hp,
                               double jitter) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = hp.signal_var * kernel_corr(pts[i], pts[j], hp.length_scales);
      K(i, j) = k;
      K(j, i) = k;
    }
    K(i, i) += hp.noise_var + jitter;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(y);
  double log_det = 0.0;
  const auto& L = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(L(i, i));
  return -0.5 * y.dot(alpha) - log_det - 0.5 * double(n) * std::log(2.0 * 3.14159265358979323846);
}

}  // namespace

GpSurrogate gp_fit(const std::vector<Trial>& trials, const SearchSpace& space) {
  if (trials.size() < 2) throw_invalid("gp_fit: need at least 2 trials");

  GpSurrogate gp;
  auto& im = *gp.impl_;
  im.points.reserve(trials.size());
  for (const auto& t : trials) im.points.push_back(t.theta);

  Eigen::VectorXd y(static_cast<Eigen::Index>(trials.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = trials[i].j_value;
  im.y_mean = y.mean();
  const double var = (y.array() - im.y_mean).square().mean();
  im.y_scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  im.y_std = (y.array() - im.y_mean) / im.y_scale;

  // Fixed grid plus seeded random restarts, scored by log marginal likelihood.
  std::vector<HyperParams> candidates;
  for (const double ls : {0.1, 0.3, 1.0, 2.0})
    for (const double sv : {0.5, 1.0, 2.0})
      for (const double nv : {1e-6, 1e-4, 1e-2})
        candidates.push_back({{ls, ls, ls, ls}, sv, nv});
  Rng rng(space.seed ^ (0x9e3779b97f4a7c15ull + trials.size()));
  for (int r = 0; r < 48; ++r) {
    HyperParams hp;
    for (int d = 0; d < kDims; ++d)
      hp.length_scales[d] = std::exp(rng.uniform(std::log(0.05), std::log(3.0)));
    hp.signal_var = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
    hp.noise_var = std::exp(rng.uniform(std::log(1e-7), std::log(1e-1)));
    candidates.push_back(hp);
  }

  double best_lml = -std::numeric_limits<double>::infinity();
  HyperParams best_hp;
  for (const auto& hp : candidates) {
    const double lml = log_marginal_likelihood(im.points, im.y_std, hp, 1e-8);
    if (lml > best_lml) {
      best_lml = lml;
      best_hp = hp;
    }
  }
  if (!std::isfinite(best_lml))
    throw_numeric("gp_fit: no hyperparameter candidate gave a positive-definite kernel");
  im.hp = best_hp;

  // Final factorization with escalating jitter.
  const auto n = static_cast<Eigen::Index>(im.points.size());
  for (double jitter = 1e-8; jitter <= 1e-4 + 1e-12; jitter *= 10.0) {
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double k =
            im.hp.signal_var * kernel_corr(im.points[i], im.points[j], im.hp.length_scales);
        K(i, j) = k;
        K(j, i) = k;
      }
      K(i, i) += im.hp.noise_var + jitter;
    }
    im.llt.compute(K);
    if (im.llt.info() == Eigen::Success) {
      im.jitter = jitter;
      im.alpha = im.llt.solve(im.y_std);
      return gp;
    }
  }
  throw_numeric("gp_fit: kernel matrix singular even at jitter 1e-4");
}

double expected_improvement_value(double mean, double stddev, double j_best) {
  if (stddev < 1e-12) return 0.0;
  const double z = (mean - j_best) / stddev;
  const double ei = (mean - j_best) * std_normal_cdf(z) + stddev * std_normal_pdf(z);
  return ei > 0.0 ? ei : 0.0;
}

double expected_improvement(const GpSurrogate& gp, const std::array<double, 4>& theta,
                            double j_best) {
  double mu = 0.0, var = 0.0;
  gp.posterior(theta, mu, var);
  return expected_improvement_value(mu, std::sqrt(var), j_best);
}

namespace {

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * double(index % base);
    index /= base;
  }
  return r;
}

std::array<double, 4> halton_point(std::size_t index, const std::array<double, 4>& shift) {
  constexpr int bases[kDims] = {2, 3, 5, 7};
  std::array<double, 4> p{};
  for (int d = 0; d < kDims; ++d) {
    p[d] = halton(index + 1, bases[d]) + shift[d];
    p[d] -= std::floor(p[d]);
  }
  return p;
}

}  // namespace

std::array<double, 4> propose_next(const GpSurrogate& gp, const SearchSpace& space,
                                   const std::vector<Trial>& history) {
  if (gp.size() < 2) throw_invalid("propose_next: surrogate is not fitted");

  double j_best = -std::numeric_limits<double>::infinity();
  for (const auto& t : history) j_best = std::max(j_best, t.j_value);

  Rng rng(space.seed ^ (0xd1b54a32d192ed03ull + history.size()));
  std::array<double, 4> shift{};
  for (int d = 0; d < kDims; ++d) shift[d] = rng.uniform();

  constexpr int kCandidates = 2048;
  std::array<double, 4> best_point = halton_point(0, shift);
  double best_ei = -1.0;
  for (int c = 0; c < kCandidates; ++c) {
    const auto cand = halton_point(static_cast<std::size_t>(c), shift);
    const double ei = expected_improvement(gp, cand, j_best);
    if (ei > best_ei) {  // strict: ties keep the lowest candidate index
      best_ei = ei;
      best_point = cand;
    }
  }

  // Never re-propose an observed point exactly.
  auto collides = [&](const std::array<double, 4>& p) {
    for (const auto& t : history) {
      double dist = 0.0;
      for (int d = 0; d < kDims; ++d) dist = std::max(dist, std::abs(p[d] - t.theta[d]));
      if (dist < 1e-9) return true;
    }
    return false;
  };
  if (collides(best_point)) {
    for (int d = 0; d < kDims; ++d) {
      best_point[d] += (best_point[d] + 1e-6 <= 1.0) ? 1e-6 : -1e-6;
    }
  }
  return best_point;
}

OptimizeResult optimize(const ObjectiveFn& objective, const SearchSpace& space) {
  space.validate();

  OptimizeResult result;
  result.history.reserve(space.budget);

  // Latin-hypercube initialization: one stratum per point per dimension.
  Rng rng(space.seed);
  const int n_init = space.init_points;
  std::array<std::vector<std::size_t>, kDims> perms;
  for (int d = 0; d < kDims; ++d) {
    perms[d].resize(n_init);
    std::iota(perms[d].begin(), perms[d].end(), std::size_t{0});
    rng.shuffle(perms[d]);
  }
  for (int i = 0; i < n_init; ++i) {
    std::array<double, 4> theta{};
    for (int d = 0; d < kDims; ++d)
      theta[d] = (double(perms[d][i]) + rng.uniform()) / double(n_init);
    Trial t = objective(theta);
    t.theta = theta;
    result.history.push_back(std::move(t));
  }

  for (int k = n_init; k < space.budget; ++k) {
    const GpSurrogate gp = gp_fit(result.history, space);
    const auto theta = propose_next(gp, space, result.history);
    Trial t = objective(theta);
    t.theta = theta;
    result.history.push_back(std::move(t));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.history.size(); ++i)
    if (result.history[i].j_value > result.history[best].j_value) best = i;
  result.theta_star = result.history[best].theta;
  result.j_star = result.history[best].j_value;
  result.config_star = space.to_config(result.theta_star);
  return result;
}

std::vector<int> cv_fold_assignment(const Dataset& d, int folds, std::uint64_t seed) {
  if (folds < 2) throw_invalid("cv_fold_assignment: need at least 2 folds");
  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < d.rows(); ++i)
    cells[(int(d.a[i]) << 1) | int(d.y[i])].push_back(i);
  Rng rng(seed);
  std::vector<int> assign(d.rows(), 0);
  int offset = 0;
  for (auto& [key, members] : cells) {
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k)
      assign[members[k]] = int((k + offset) % std::size_t(folds));
    offset = int((offset + members.size()) % std::size_t(folds));
  }
  return assign;
}

Trial evaluate_objective(const Dataset& train, const std::array<double, 4>& theta,
                         const TrainConfig& tcfg, const SearchSpace& space, int folds,
                         int threads) {
  if (folds < 2) throw_invalid("evaluate_objective: need at least 2 folds");
  if (!train.preprocessed) throw_data("evaluate_objective: dataset must be preprocessed");

  const FairnessConfig fcfg = space.to_config(theta);
  const auto assign = cv_fold_assignment(train, folds, space.seed);

  Trial trial;
  trial.theta = theta;
  trial.fold_scores.resize(folds);

  auto run_fold = [&](int f) {
    std::vector<std::size_t> fit_idx, val_idx;
    for (std::size_t i = 0; i < train.rows(); ++i)
      (assign[i] == f ? val_idx : fit_idx).push_back(i);
    const Dataset fit_part = train.subset(fit_idx);
    const Dataset val_part = train.subset(val_idx);

    const TreeEnsemble model = train_fair(fit_part, tcfg, fcfg);
    const auto p = predict_proba(model, val_part.X);

    auto& score = trial.fold_scores[f];
    score.auc = auc_roc(p, val_part.y);
    if (val_part.group_count(0) == 0 || val_part.group_count(1) == 0) {
      score.fair_loss_valid = false;  // single-group fold: penalty skipped, flagged
      score.fair_loss = 0.0;
    } else {
      const GroupView view(p, val_part.a);
      score.fair_loss = fairness_loss(view, fcfg.w1, fcfg.w2, fcfg.w3, MetricMode::soft);
    }
  };

  if (threads > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(threads, folds);
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int f = next.fetch_add(1); f < folds; f = next.fetch_add(1)) run_fold(f);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (int f = 0; f < folds; ++f) run_fold(f);
  }

  double auc_sum = 0.0, fair_sum = 0.0;
  int fair_n = 0;
  for (const auto& s : trial.fold_scores) {
    auc_sum += s.auc;
    if (s.fair_loss_valid) {
      fair_sum += s.fair_loss;
      ++fair_n;
    }
  }
  trial.mean_auc = auc_sum / double(folds);
  trial.mean_fair_loss = fair_n > 0 ? fair_sum / double(fair_n) : 0.0;
  trial.j_value = space.alpha * trial.mean_auc - (1.0 - space.alpha) * trial.mean_fair_loss;
  return trial;
}

OptimizeResult optimize(const Dataset& train, const SearchSpace& space,
                        const TrainConfig& tcfg, int folds, int threads) {
  return optimize(
      [&](const std::array<double, 4>& theta) {
        return evaluate_objective(train, theta, tcfg, space, folds, threads);
      },
      space);
}

void write_history_csv(const std::vector<Trial>& history, const SearchSpace& space,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write history file: " + path);
  out << "k,lambda,w1,w2,w3,mean_auc,mean_Lfair,J\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    const auto cfg = space.to_config(history[k].theta);
    out << (k + 1) << "," << format_g17(cfg.lambda) << "," << format_g17(cfg.w1) << ","
        << format_g17(cfg.w2) << "," << format_g17(cfg.w3) << ","
        << format_g17(history[k].mean_auc) << "," << format_g17(history[k].mean_fair_loss)
        << "," << format_g17(history[k].j_value) << "\n";
  }
  if (!out) throw_io("failed writing history file: " + path);
}

}  // namespace fairboost
