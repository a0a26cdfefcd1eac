#include "fairboost/shap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fairboost/error.hpp"
#include "text_util.hpp"

namespace fairboost {

using detail::format_g17;

namespace {

// Statistics carried along the current unique-feature path of the recursion:
// the split feature, the fraction of cover-weighted paths flowing through
// when the feature is excluded (zero) or included (one), and the permutation
// weight of subsets of each size.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * double(i + 1) / double(depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * double(depth - i) / double(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;

  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one_portion * double(depth + 1) / (double(i + 1) * one_fraction);
      next_one_portion =
          tmp - path[i].pweight * zero_fraction * double(depth - i) / double(depth + 1);
    } else {
      path[i].pweight =
          path[i].pweight * double(depth + 1) / (zero_fraction * double(depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one_portion * double(depth + 1) / (double(i + 1) * one_fraction);
      total += tmp;
      next_one_portion =
          path[i].pweight - tmp * zero_fraction * double(depth - i) / double(depth + 1);
    } else {
      total += path[i].pweight / zero_fraction * double(depth + 1) / double(depth - i);
    }
  }
  return total;
}

void tree_shap_recurse(const Tree& tree, std::span<const double> x, double* phi, int node,
                       int unique_depth, PathElement* parent_path, double parent_zero_fraction,
                       double parent_one_fraction, int parent_feature) {
  PathElement* path = parent_path + unique_depth + 1;
  std::copy(parent_path, parent_path + unique_depth + 1, path);
  extend_path(path, unique_depth, parent_zero_fraction, parent_one_fraction, parent_feature);

  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf) {
    for (int i = 1; i <= unique_depth; ++i) {
      const double w = unwound_path_sum(path, unique_depth, i);
      const PathElement& el = path[i];
      phi[el.feature] += w * (el.one_fraction - el.zero_fraction) * n.value;
    }
    return;
  }

  const int hot = (x[n.feature] < n.threshold) ? n.left : n.right;
  const int cold = (hot == n.left) ? n.right : n.left;
  if (n.cover <= 0.0 || tree.nodes[hot].cover <= 0.0 || tree.nodes[cold].cover <= 0.0)
    throw_data("treeshap: zero-cover node in model");
  const double hot_zero_fraction = tree.nodes[hot].cover / n.cover;
  const double cold_zero_fraction = tree.nodes[cold].cover / n.cover;
  double incoming_zero_fraction = 1.0;
  double incoming_one_fraction = 1.0;

  // If this feature already appears on the path, undo that extension and
  // fold its fractions into the new one.
  int path_index = 0;
  while (path_index <= unique_depth && path[path_index].feature != n.feature) ++path_index;
  if (path_index != unique_depth + 1) {
    incoming_zero_fraction = path[path_index].zero_fraction;
    incoming_one_fraction = path[path_index].one_fraction;
    unwind_path(path, unique_depth, path_index);
    unique_depth -= 1;
  }

  tree_shap_recurse(tree, x, phi, hot, unique_depth + 1, path,
                    hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
                    n.feature);
  tree_shap_recurse(tree, x, phi, cold, unique_depth + 1, path,
                    cold_zero_fraction * incoming_zero_fraction, 0.0, n.feature);
}

}  // namespace

std::vector<double> treeshap_tree(const Tree& tree, std::span<const double> x,
                                  std::size_t num_features, double& base) {
  std::vector<double> phi(num_features, 0.0);
  if (tree.nodes.empty()) {
    base = 0.0;
    return phi;
  }
  if (tree.nodes[0].cover <= 0.0) throw_data("treeshap: zero-cover root");
  base = tree.expected_value();
  if (tree.nodes[0].is_leaf) return phi;

  const int maxd = tree.max_depth() + 2;
  std::vector<PathElement> path_storage((maxd * (maxd + 1)) / 2);
  tree_shap_recurse(tree, x, phi.data(), 0, 0, path_storage.data(), 1.0, 1.0, -1);
  return phi;
}

ShapAttribution treeshap_ensemble(const TreeEnsemble& model, const Matrix& X,
                                  const std::vector<std::string>& feature_names) {
  if (X.cols() != model.num_features)
    throw_data("treeshap_ensemble: feature count mismatch");

  ShapAttribution attr;
  attr.phi = Matrix(X.rows(), X.cols());
  attr.base_value = model.base_margin;
  for (const auto& tree : model.trees)
    attr.base_value += model.learning_rate * tree.expected_value();

  if (!feature_names.empty()) {
    if (feature_names.size() != X.cols())
      throw_invalid("treeshap_ensemble: feature name count mismatch");
    attr.feature_names = feature_names;
  } else {
    for (std::size_t j = 0; j < X.cols(); ++j)
      attr.feature_names.push_back("f" + std::to_string(j));
  }

  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    for (const auto& tree : model.trees) {
      double base = 0.0;
      const auto phi = treeshap_tree(tree, x, X.cols(), base);
      for (std::size_t j = 0; j < X.cols(); ++j)
        attr.phi(i, j) += model.learning_rate * phi[j];
    }
  }
  return attr;
}

std::vector<std::size_t> mean_abs_ranking(const ShapAttribution& attr) {
  const std::size_t d = attr.phi.cols();
  std::vector<double> mean_abs(d, 0.0);
  for (std::size_t i = 0; i < attr.phi.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) mean_abs[j] += std::abs(attr.phi(i, j));
  for (auto& v : mean_abs) v /= double(std::max<std::size_t>(attr.phi.rows(), 1));

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return mean_abs[i] > mean_abs[j];
  });
  return order;
}

GroupDisparity group_disparity(const ShapAttribution& attr, std::span<const std::int8_t> a) {
  if (a.size() != attr.phi.rows())
    throw_invalid("group_disparity: sensitive vector does not match attribution rows");
  std::size_t m0 = 0, m1 = 0;
  for (const auto g : a) (g == 1 ? m1 : m0) += 1;
  if (m0 == 0 || m1 == 0) throw_data("group_disparity: a sensitive group is empty");

  const std::size_t d = attr.phi.cols();
  GroupDisparity out;
  out.mean_phi_group0.assign(d, 0.0);
  out.mean_phi_group1.assign(d, 0.0);
  out.mean_abs_phi.assign(d, 0.0);
  for (std::size_t i = 0; i < attr.phi.rows(); ++i) {
    auto& target = (a[i] == 1) ? out.mean_phi_group1 : out.mean_phi_group0;
    for (std::size_t j = 0; j < d; ++j) {
      target[j] += attr.phi(i, j);
      out.mean_abs_phi[j] += std::abs(attr.phi(i, j));
    }
  }
  out.delta_phi.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.mean_phi_group0[j] /= double(m0);
    out.mean_phi_group1[j] /= double(m1);
    out.mean_abs_phi[j] /= double(attr.phi.rows());
    out.delta_phi[j] = out.mean_phi_group0[j] - out.mean_phi_group1[j];
  }
  return out;
}

void write_attribution_csv(const ShapAttribution& attr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write attribution file: " + path);
  for (const auto& name : attr.feature_names) out << name << ",";
  out << "base_value\n";
  for (std::size_t i = 0; i < attr.phi.rows(); ++i) {
    for (std::size_t j = 0; j < attr.phi.cols(); ++j) out << format_g17(attr.phi(i, j)) << ",";
    out << format_g17(attr.base_value) << "\n";
  }
  if (!out) throw_io("failed writing attribution file: " + path);
}

void write_disparity_csv(const ShapAttribution& attr, const GroupDisparity& disparity,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_io("cannot write disparity file: " + path);

  std::vector<std::size_t> order(disparity.delta_phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return disparity.mean_abs_phi[i] > disparity.mean_abs_phi[j];
  });

  out << "feature,mean_phi_group0,mean_phi_group1,delta_phi,mean_abs_phi\n";
  for (const auto j : order) {
    out << attr.feature_names[j] << "," << format_g17(disparity.mean_phi_group0[j]) << ","
        << format_g17(disparity.mean_phi_group1[j]) << ","
        << format_g17(disparity.delta_phi[j]) << "," << format_g17(disparity.mean_abs_phi[j])
        << "\n";
  }
  if (!out) throw_io("failed writing disparity file: " + path);
}

}  // namespace fairboost
