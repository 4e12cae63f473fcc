#pragma once

#include <cstddef>
#include <vector>

#include "tailagg/random.hpp"

namespace tailagg {

/// |xi| below this switches to the exponential (xi = 0) formulas.
inline constexpr double kXiZeroTol = 1e-8;

/// Generalized Pareto law on [0, x^F) with scale `sigma` and shape `xi`.
///
/// Support is bounded above at -sigma/xi when xi < 0 and unbounded otherwise.
struct GpdParams {
  double sigma = 1.0;
  double xi = 0.0;

  GpdParams() = default;
  /// Throws InvalidArgument unless sigma > 0 and both values are finite.
  GpdParams(double sigma, double xi);

  double upper_endpoint() const;
  bool operator==(const GpdParams&) const = default;
};

/// H(x) = 1 - (1 + xi x / sigma)_+^{-1/xi}; exponential form for |xi| < kXiZeroTol.
/// Negative x is clamped to 0.
double gpd_cdf(const GpdParams& p, double x);

/// 1 - H(x), computed directly so that tail probabilities keep full precision.
double gpd_survival(const GpdParams& p, double x);

/// Inverse of gpd_cdf. Requires 0 <= q < 1, or q == 1 when xi < 0 (returns the
/// endpoint).
double gpd_quantile(const GpdParams& p, double q);

/// Quantile at 1 - tail_prob, accurate for tail_prob far below machine epsilon.
double gpd_tail_quantile(const GpdParams& p, double tail_prob);

/// log density at x (excess over the lower endpoint). -inf outside support.
double gpd_logpdf(const GpdParams& p, double x);

/// n independent draws by inverse transform.
std::vector<double> gpd_sample(const GpdParams& p, std::size_t n, Rng& rng);

/// Law of (X - u) | X > u for X ~ GPD(sigma, xi): GPD(sigma + xi u, xi).
/// Throws InvalidArgument unless 0 <= u < upper_endpoint().
GpdParams threshold_stability(const GpdParams& p, double u);

}  // namespace tailagg
