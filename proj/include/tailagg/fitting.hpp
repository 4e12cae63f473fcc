#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tailagg/gpd.hpp"

namespace tailagg {

/// Lower bound on the shape during likelihood maximisation.
inline constexpr double kXiLowerBound = -1.0 + 1e-6;
inline constexpr std::size_t kMinExceedances = 5;

struct GpdFit {
  GpdParams params;
  double threshold = 0.0;
  std::size_t n_exceed = 0;
  double loglik = 0.0;
  bool converged = false;
  /// Standard errors from the observed information (empty if singular).
  std::optional<double> se_sigma;
  std::optional<double> se_xi;
};

struct PooledFit {
  double sigma_i = 1.0;
  double sigma_j = 1.0;
  double xi_common = 0.0;
  double loglik = 0.0;
  double threshold_i = 0.0;
  double threshold_j = 0.0;
  std::size_t n_exceed_i = 0;
  std::size_t n_exceed_j = 0;
  bool converged = false;
  std::optional<double> se_xi;
};

/// Excesses of one series with optional integer-valued multiplicities
/// (empty `weights` means every excess counts once).
struct WeightedExcesses {
  std::span<const double> excess;
  std::span<const double> weights;
};

/// Maximum-likelihood fit of K series sharing a shape with free scales.
struct SharedShapeFit {
  std::vector<double> sigma;
  double xi = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::optional<double> se_xi;
  std::vector<std::optional<double>> se_sigma;
};

/// Weighted GPD log-likelihood of non-negative excesses.
double gpd_loglik(std::span<const double> excess, const GpdParams& p,
                  std::span<const double> weights = {});

/// Probability-weighted-moment estimate (Hosking and Wallis), used as the
/// optimiser's starting point.
GpdParams gpd_pwm(std::span<const double> excess, std::span<const double> weights = {});

/// Damped Newton in (log sigma_k, xi) from a PWM start. Throws
/// EstimationError when a series has fewer than kMinExceedances effective
/// excesses or all its excesses are equal.
SharedShapeFit fit_shared_shape(std::span<const WeightedExcesses> series);

/// GPD fit to excesses (strictly) above an already chosen threshold.
GpdFit fit_gpd_excesses(std::span<const double> excess, std::span<const double> weights = {});

/// GPD fit to the excesses of `data` above its empirical p-quantile.
GpdFit fit_gpd(std::span<const double> data, double p);

/// Two-series fit with a common shape; each series uses its own empirical
/// p-quantile as threshold.
PooledFit fit_gpd_pooled(std::span<const double> data_i, std::span<const double> data_j, double p);

/// Excesses of `data` over `threshold`, keeping only values strictly above it.
std::vector<double> excesses_over(std::span<const double> data, double threshold);

}  // namespace tailagg
