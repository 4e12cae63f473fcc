#pragma once

#include <cstddef>
#include <span>

namespace tailagg {

/// 0-based order-statistic index of the inverse-empirical-cdf p-quantile of
/// n values: the ceil(n p)-th smallest, clamped to [1, n]. A relative slack
/// of 1e-12 absorbs rounding in n * p.
std::size_t order_statistic_index(std::size_t n, double p);

/// Inverse empirical cdf quantile of `values` (copies; O(n) selection).
double empirical_quantile(std::span<const double> values, double p);

}  // namespace tailagg
