#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailagg/copula.hpp"
#include "tailagg/random.hpp"
#include "tailagg/tailpredict.hpp"

namespace tailagg {

/// Aggregation weights (w1, w2), each in (0, 1), summing to one.
struct Weights {
  double w1 = 0.5;
  double w2 = 0.5;

  Weights() = default;
  Weights(double w1, double w2);
};

/// Margins of the weighted components w_i X_i, i.e. GPD(w_i sigma_i, xi_i).
MarginPair weighted_margins(const MarginPair& margins, const Weights& weights);

/// Margins that, with equal weights, make the aggregate equal the plain sum
/// X1 + X2 of the given margins (scales doubled). Exact in floating point.
MarginPair plain_sum_margins(const MarginPair& margins);

struct SimulationOptions {
  /// Number of generator streams; results depend on (seed, shards) only.
  std::size_t shards = 16;
  Execution execution = Execution::Parallel;
};

struct AggregateSample {
  std::vector<double> values;
  MarginPair margins;
  CopulaSpec spec;
  Weights weights;
  std::uint64_t seed = 0;
};

/// n draws of R = w1 X1 + w2 X2: pairs from the copula, margins by inverse
/// transform. Shard s covers a fixed slice of the output and uses
/// make_stream(seed, s), so serial and parallel runs are identical.
AggregateSample simulate_aggregate(const MarginPair& margins, const CopulaSpec& spec,
                                   const Weights& weights, std::size_t n, std::uint64_t seed,
                                   const SimulationOptions& opts = {});

/// Copula pairs for the same shards; the aggregate draws are built from these.
std::vector<UniformPair> simulate_pairs(const CopulaSpec& spec, std::size_t n, std::uint64_t seed,
                                        const SimulationOptions& opts = {});

/// Inverse empirical cdf quantiles at each probability (any order).
std::vector<double> empirical_quantiles(std::span<const double> values,
                                        std::span<const double> probs);

enum class CurveTransform { LogR, RawR, NegLogDeficit };

struct QuantileCurve {
  std::vector<double> probs;
  std::vector<double> quantiles;
  std::vector<double> transformed;
  CurveTransform transform = CurveTransform::RawR;
  double slope_estimate = 0.0;
  double intercept = 0.0;
};

/// `count` equally spaced probabilities in [lo, hi]; defaults match the
/// [0.99, 0.999] range used for the slope diagnostic.
std::vector<double> default_p_grid(std::size_t count = 40, double lo = 0.99, double hi = 0.999);

/// OLS of -log(1 - p) on log r_p (Heavy), r_p (Exponential) or
/// -log(r_F - r_p) (Bounded). The slope estimates 1/xi_R, 1/sigma_R or
/// -1/xi_R respectively. Throws EndpointViolation if a Bounded quantile
/// reaches r_F.
QuantileCurve slope_diagnostic(std::span<const double> values, const TailForm& predicted,
                               std::span<const double> p_grid);

/// xi_R or sigma_R implied by a fitted slope under the given regime.
double implied_parameter(TailRegime regime, double slope);

struct Envelope {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct Verdict {
  TailForm prediction;
  std::optional<QuantileCurve> curve;
  double predicted = 0.0;
  std::optional<double> implied;
  std::optional<double> relative_error;
  double tolerance = 0.0;
  std::optional<Envelope> envelope;
  bool pass = false;
  /// Set when the check could not run, e.g. an endpoint violation.
  std::string failure;
};

/// Default relative tolerance for a prediction: 10%, widened to 15% when
/// the prefactor is not constant in r.
double default_tolerance(const TailForm& form);

/// Compares a sample of R against a prediction. For IntervalConstant
/// prefactors the survivor ratio (1 - p) exp(r_p / sigma_R) must also lie in
/// [0.5, 2 C1] across the grid.
Verdict verify_sample(std::span<const double> values, const TailForm& prediction,
                      std::span<const double> p_grid, std::optional<double> tolerance = {});

/// predict_copula on the weighted margins, simulate, then verify_sample.
Verdict verify_prediction(const MarginPair& margins, const CopulaSpec& spec,
                          const Weights& weights, std::size_t n, std::span<const double> p_grid,
                          std::optional<double> tolerance, std::uint64_t seed,
                          const SimulationOptions& opts = {});

std::string to_string(CurveTransform t);

}  // namespace tailagg
