#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairboost/gbt.hpp"
#include "fairboost/matrix.hpp"

namespace fairboost {

// Per-instance, per-feature Shapley values in margin space.
// Local accuracy: base_value + sum_j phi(i, j) equals the predicted margin.
struct ShapAttribution {
  Matrix phi;  // m x d
  double base_value = 0.0;
  std::vector<std::string> feature_names;
};

struct GroupDisparity {
  std::vector<double> delta_phi;        // mean_phi_group0 - mean_phi_group1
  std::vector<double> mean_phi_group0;
  std::vector<double> mean_phi_group1;
  std::vector<double> mean_abs_phi;     // over all instances
};

// Exact Shapley values of a single tree under the path-dependent value
// function with cover-derived weights. Returns the per-feature attributions;
// `base` receives the cover-weighted expected leaf value.
std::vector<double> treeshap_tree(const Tree& tree, std::span<const double> x,
                                  std::size_t num_features, double& base);

// Ensemble attributions: learning-rate-scaled sum of per-tree values
// (Shapley linearity over the additive model).
ShapAttribution treeshap_ensemble(const TreeEnsemble& model, const Matrix& X,
                                  const std::vector<std::string>& feature_names = {});

// Features sorted by mean |phi| descending; ties break to the lower index.
std::vector<std::size_t> mean_abs_ranking(const ShapAttribution& attr);

GroupDisparity group_disparity(const ShapAttribution& attr, std::span<const std::int8_t> a);

// One row per instance: per-feature phi columns plus base_value.
void write_attribution_csv(const ShapAttribution& attr, const std::string& path);

// (feature, mean_phi_group0, mean_phi_group1, delta_phi, mean_abs_phi)
// sorted by mean_abs_phi descending.
void write_disparity_csv(const ShapAttribution& attr, const GroupDisparity& disparity,
                         const std::string& path);

}  // namespace fairboost
