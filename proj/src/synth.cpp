#include <cmath>
#include <string>

#include "fairboost/dataset.hpp"
#include "fairboost/error.hpp"
#include "fairboost/gbt.hpp"
#include "fairboost/rng.hpp"

namespace fairboost {

// Column 0 ("proxy") carries the sensitive attribute at |corr| ~ 0.89 but has
// no direct effect on the label; all label signal flows through the remaining
// features plus the group-shifted intercept. A biased model therefore has to
// reach the injected disparity through the proxy, which is exactly what the
// attribution audit should surface.
Dataset synth_biased(std::size_t m, std::size_t d, double bias_strength, std::uint64_t seed) {
  if (m < 100) throw_invalid("synth_biased: need at least 100 rows");
  if (d < 3) throw_invalid("synth_biased: need at least 3 feature columns");
  if (bias_strength < 0.0) throw_invalid("synth_biased: bias_strength must be >= 0");

  Rng rng(seed);

  Dataset out;
  out.schema.label_column = "outcome";
  out.schema.sensitive_column = "group";
  out.schema.sensitive_code0 = "0";
  out.schema.sensitive_code1 = "1";
  out.schema.columns.push_back({"proxy", ColumnKind::continuous});
  for (std::size_t j = 1; j < d; ++j)
    out.schema.columns.push_back({"f" + std::to_string(j), ColumnKind::continuous});

  out.X = Matrix(m, d);
  out.y.resize(m);
  out.a.resize(m);
  out.raw_categorical.resize(d);
  out.encoders.resize(d);
  out.standardizers.resize(d);

  for (std::size_t i = 0; i < m; ++i) out.a[i] = rng.bernoulli(0.5) ? 1 : 0;

  constexpr double kProxyShift = 1.5;
  constexpr double kProxyNoise = 0.75;
  for (std::size_t i = 0; i < m; ++i)
    out.X(i, 0) = kProxyShift * (2.0 * out.a[i] - 1.0) + rng.normal(0.0, kProxyNoise);

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 1; j < d; ++j) out.X(i, j) = rng.normal();

  // Ground-truth coefficients, rescaled so the clean signal has stddev 2.
  std::vector<double> beta(d, 0.0);
  double ss = 0.0;
  for (std::size_t j = 1; j < d; ++j) {
    const double mag = rng.uniform(0.5, 1.5);
    beta[j] = rng.bernoulli(0.5) ? mag : -mag;
    ss += beta[j] * beta[j];
  }
  const double scale = 2.0 / std::sqrt(ss);
  for (std::size_t j = 1; j < d; ++j) beta[j] *= scale;

  for (std::size_t i = 0; i < m; ++i) {
    double logit = (2.0 * out.a[i] - 1.0) * bias_strength;
    for (std::size_t j = 1; j < d; ++j) logit += beta[j] * out.X(i, j);
    out.y[i] = rng.bernoulli(sigmoid(logit)) ? 1 : 0;
  }

  return out;
}

}  // namespace fairboost
