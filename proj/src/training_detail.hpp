#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fairboost {

// Gradients/hessians of the mean logistic loss wrt margins:
// g_i = (p_i - y_i)/m, h_i = max(p_i(1-p_i), 1e-12)/m. Shared by the baseline
// and fairness-aware loops so the zero-penalty paths coincide exactly.
void logistic_mean_grad_hess(const std::vector<double>& margins,
                             std::span<const std::int8_t> y, std::vector<double>& grad,
                             std::vector<double>& hess);

}  // namespace fairboost
