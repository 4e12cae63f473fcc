#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tailagg/random.hpp"

namespace tailagg {

struct BootstrapCI {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t n_boot = 0;
  /// Replicates on which the statistic failed.
  std::size_t n_dropped = 0;
  /// The percentile interval did not contain the point estimate and was
  /// widened to include it.
  bool widened = false;
};

struct BootstrapOptions {
  double mean_block = 1.0;
  std::size_t n_boot = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  Execution execution = Execution::Parallel;
};

/// Politis-Romano stationary bootstrap: n time indices built from blocks of
/// consecutive (circularly wrapped) indices with Geometric lengths of mean
/// `mean_block`.
std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block, Rng& rng);

/// Multiplicity of each original index in one stationary-bootstrap resample.
/// Same random stream as stationary_bootstrap_indices.
void stationary_bootstrap_counts(std::size_t n, double mean_block, Rng& rng,
                                 std::span<std::uint32_t> counts);

/// Percentile interval (type-7 interpolation) from replicate values; NaN
/// replicates count as dropped. Throws EstimationError if more than 10% of
/// the replicates were dropped.
BootstrapCI percentile_ci(double point, std::span<const double> replicates, double level);

/// Statistic evaluated on a resampled time-index sequence.
using IndexStatistic = std::function<double(std::span<const std::size_t>)>;
/// Several statistics evaluated on the same resample; NaN marks a failure.
using MultiIndexStatistic = std::function<std::vector<double>(std::span<const std::size_t>)>;

/// Bootstrap CI for one statistic. Replicate r draws its indices from
/// make_stream(seed, r), so results do not depend on scheduling. A statistic
/// that throws tailagg::Error drops the replicate.
BootstrapCI stationary_bootstrap(std::size_t n, const IndexStatistic& statistic,
                                 const BootstrapOptions& opts);

/// Replicate values of several statistics on shared resamples: row r holds
/// the statistics of replicate r.
std::vector<std::vector<double>> stationary_bootstrap_replicates(
    std::size_t n, const MultiIndexStatistic& statistic, const BootstrapOptions& opts);

/// Bundle convenience: every series is resampled with the same indices.
BootstrapCI stationary_bootstrap(
    std::span<const std::vector<double>> bundle,
    const std::function<double(std::span<const std::vector<double>>)>& statistic,
    const BootstrapOptions& opts);

}  // namespace tailagg
