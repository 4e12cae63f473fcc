#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailagg/copula.hpp"

namespace tailagg {

/// An empirical chi or eta estimate at threshold probability `threshold_q`.
struct DependenceEstimate {
  double value = 0.0;
  double threshold_q = 0.0;
  std::size_t n_exceed = 0;
  /// Asymptotic standard error (binomial for chi, value/sqrt(k) for eta).
  std::optional<double> stderr_;
  /// True when the raw eta estimate exceeded 1 and was clamped.
  bool clamped = false;
};

inline constexpr double kDefaultEtaQ = 0.95;

/// Average ranks divided by (n + 1), so values lie strictly inside (0, 1).
std::vector<double> pseudo_uniform_ranks(std::span<const double> x);

/// Finite-q coefficient #{u > q and v > q} / #{v > q} on rank scale.
DependenceEstimate chi_empirical(std::span<const double> x1, std::span<const double> x2,
                                 double q);
DependenceEstimate chi_empirical(std::span<const UniformPair> sample, double q);

/// Structure-variable estimate of eta: mean excess of T = min(E1, E2) above
/// its q-quantile, where Ei are the rank-based standard exponential margins.
DependenceEstimate eta_estimate(std::span<const double> x1, std::span<const double> x2,
                                double q = kDefaultEtaQ);
DependenceEstimate eta_estimate(std::span<const UniformPair> sample, double q = kDefaultEtaQ);

/// Precomputed sort orders so that eta can be re-estimated on bootstrap
/// resamples in O(n) without materialising them.
class EtaResampler {
 public:
  EtaResampler(std::span<const double> x1, std::span<const double> x2);

  /// eta_estimate on the multiset in which time t appears `counts[t]` times.
  /// Equal (to rounding) to materialising the resample and calling eta_estimate.
  DependenceEstimate estimate(std::span<const std::uint32_t> counts, double q) const;

  std::size_t size() const { return order1_.size(); }

 private:
  void ranks_into(const std::vector<std::size_t>& order, const std::vector<double>& values,
                  std::span<const std::uint32_t> counts, std::size_t total,
                  std::vector<double>& out) const;

  std::vector<double> x1_, x2_;
  std::vector<std::size_t> order1_, order2_;
};

}  // namespace tailagg
