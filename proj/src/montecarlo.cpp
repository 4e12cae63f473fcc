#include "tailagg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tailagg/errors.hpp"
#include "tailagg/stats.hpp"

namespace tailagg {

namespace {

constexpr std::size_t kChunk = 4096;

struct Slice {
  std::size_t begin;
  std::size_t end;
};

Slice shard_slice(std::size_t n, std::size_t shards, std::size_t s) {
  const std::size_t base = n / shards, extra = n % shards;
  const std::size_t begin = s * base + std::min(s, extra);
  return {begin, begin + base + (s < extra ? 1 : 0)};
}

template <typename Body>
void for_each_shard(std::size_t shards, Execution execution, Body&& body) {
  const auto S = static_cast<std::int64_t>(shards);
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t s = 0; s < S; ++s) body(static_cast<std::size_t>(s));
  } else {
    for (std::int64_t s = 0; s < S; ++s) body(static_cast<std::size_t>(s));
  }
}

void check_shards(const SimulationOptions& opts) {
  if (opts.shards == 0) throw InvalidArgument("shard count must be positive");
}

}  // namespace

Weights::Weights(double a, double b) : w1(a), w2(b) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) || std::abs(a + b - 1.0) > 1e-12) {
    throw InvalidArgument("weights must lie in (0, 1) and sum to 1");
  }
}

MarginPair weighted_margins(const MarginPair& m, const Weights& w) {
  return {GpdParams(w.w1 * m.m1.sigma, m.m1.xi), GpdParams(w.w2 * m.m2.sigma, m.m2.xi)};
}

MarginPair plain_sum_margins(const MarginPair& m) {
  return {GpdParams(2.0 * m.m1.sigma, m.m1.xi), GpdParams(2.0 * m.m2.sigma, m.m2.xi)};
}

std::vector<UniformPair> simulate_pairs(const CopulaSpec& spec, std::size_t n, std::uint64_t seed,
                                        const SimulationOptions& opts) {
  check_shards(opts);
  std::vector<UniformPair> out(n);
  for_each_shard(opts.shards, opts.execution, [&](std::size_t s) {
    const auto slice = shard_slice(n, opts.shards, s);
    Rng rng = make_stream(seed, s);
    for (std::size_t i = slice.begin; i < slice.end; i += kChunk) {
      const auto len = std::min(kChunk, slice.end - i);
      copula_sample_into(spec, std::span<UniformPair>(out).subspan(i, len), rng);
    }
  });
  return out;
}

AggregateSample simulate_aggregate(const MarginPair& margins, const CopulaSpec& spec,
                                   const Weights& weights, std::size_t n, std::uint64_t seed,
                                   const SimulationOptions& opts) {
  if (n == 0) throw InvalidArgument("sample size must be positive");
  check_shards(opts);
  AggregateSample sample{std::vector<double>(n), margins, spec, weights, seed};
  for_each_shard(opts.shards, opts.execution, [&](std::size_t s) {
    const auto slice = shard_slice(n, opts.shards, s);
    Rng rng = make_stream(seed, s);
    std::vector<UniformPair> buf(kChunk);
    for (std::size_t i = slice.begin; i < slice.end; i += kChunk) {
      const auto len = std::min(kChunk, slice.end - i);
      std::span<UniformPair> chunk(buf.data(), len);
      copula_sample_into(spec, chunk, rng);
      for (std::size_t j = 0; j < len; ++j) {
        const double x1 = gpd_quantile(margins.m1, chunk[j].u);
        const double x2 = gpd_quantile(margins.m2, chunk[j].v);
        sample.values[i + j] = weights.w1 * x1 + weights.w2 * x2;
      }
    }
  });
  return sample;
}

std::vector<double> empirical_quantiles(std::span<const double> values,
                                        std::span<const double> probs) {
  if (values.empty()) throw InvalidArgument("quantiles of an empty sample");
  std::vector<double> out(probs.size());
  if (probs.empty()) return out;
  for (const double p : probs) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("probabilities must lie in (0, 1)");
  }
  const auto n = values.size();
  std::size_t lowest = n - 1;
  for (const double p : probs) lowest = std::min(lowest, order_statistic_index(n, p));
  // Select the lowest needed order statistic, then sort only what lies above it.
  std::vector<double> copy(values.begin(), values.end());
  const auto pivot = copy.begin() + static_cast<std::ptrdiff_t>(lowest);
  std::nth_element(copy.begin(), pivot, copy.end());
  std::sort(pivot, copy.end());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = copy[order_statistic_index(n, probs[i])];
  return out;
}

std::vector<double> default_p_grid(std::size_t count, double lo, double hi) {
  if (count < 2 || !(lo > 0.0 && lo < hi && hi < 1.0)) {
    throw InvalidArgument("p grid needs count >= 2 and 0 < lo < hi < 1");
  }
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

QuantileCurve slope_diagnostic(std::span<const double> values, const TailForm& predicted,
                               std::span<const double> p_grid) {
  if (p_grid.size() < 2) throw InvalidArgument("slope diagnostic needs at least two probabilities");
  for (std::size_t i = 1; i < p_grid.size(); ++i) {
    if (!(p_grid[i] > p_grid[i - 1])) throw InvalidArgument("p grid must be strictly increasing");
  }
  QuantileCurve curve;
  curve.probs.assign(p_grid.begin(), p_grid.end());
  curve.quantiles = empirical_quantiles(values, p_grid);
  curve.transformed.resize(p_grid.size());
  switch (predicted.regime) {
    case TailRegime::Heavy: curve.transform = CurveTransform::LogR; break;
    case TailRegime::Exponential: curve.transform = CurveTransform::RawR; break;
    case TailRegime::Bounded: curve.transform = CurveTransform::NegLogDeficit; break;
  }
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const double r = curve.quantiles[i];
    switch (curve.transform) {
      case CurveTransform::LogR:
        if (!(r > 0.0)) throw EstimationError("log transform needs positive quantiles");
        curve.transformed[i] = std::log(r);
        break;
      case CurveTransform::RawR:
        curve.transformed[i] = r;
        break;
      case CurveTransform::NegLogDeficit:
        if (!(r < predicted.r_F)) {
          throw EndpointViolation("empirical quantile " + std::to_string(r) + " at p=" +
                                  std::to_string(p_grid[i]) + " reaches the predicted endpoint " +
                                  std::to_string(predicted.r_F));
        }
        curve.transformed[i] = -std::log(predicted.r_F - r);
        break;
    }
  }
  // Ordinary least squares of -log(1 - p) on the transformed quantile.
  const auto m = static_cast<double>(p_grid.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    mx += curve.transformed[i];
    my += -std::log1p(-p_grid[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const double dx = curve.transformed[i] - mx;
    sxy += dx * (-std::log1p(-p_grid[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw EstimationError("quantiles are constant over the p grid");
  curve.slope_estimate = sxy / sxx;
  curve.intercept = my - curve.slope_estimate * mx;
  return curve;
}

double implied_parameter(TailRegime regime, double slope) {
  return regime == TailRegime::Bounded ? -1.0 / slope : 1.0 / slope;
}

double default_tolerance(const TailForm& form) {
  return form.prefactor_class == PrefactorClass::LinearInR ? 0.15 : 0.10;
}

Verdict verify_sample(std::span<const double> values, const TailForm& prediction,
                      std::span<const double> p_grid, std::optional<double> tolerance) {
  Verdict v;
  v.prediction = prediction;
  v.predicted = prediction.parameter();
  v.tolerance = tolerance.value_or(default_tolerance(prediction));
  try {
    v.curve = slope_diagnostic(values, prediction, p_grid);
  } catch (const EndpointViolation& e) {
    v.failure = std::string("endpoint violation: ") + e.what();
    return v;
  }
  v.implied = implied_parameter(prediction.regime, v.curve->slope_estimate);
  v.relative_error = std::abs(*v.implied - v.predicted) / std::abs(v.predicted);
  v.pass = *v.relative_error <= v.tolerance;

  if (prediction.prefactor_class == PrefactorClass::IntervalConstant && prediction.c_bounds) {
    Envelope env;
    env.lower = 0.5;
    env.upper = 2.0 * prediction.c_bounds->second;
    env.min_ratio = std::numeric_limits<double>::infinity();
    env.max_ratio = 0.0;
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      const double ratio =
          (1.0 - p_grid[i]) * std::exp(v.curve->quantiles[i] / prediction.sigma_R.value());
      env.min_ratio = std::min(env.min_ratio, ratio);
      env.max_ratio = std::max(env.max_ratio, ratio);
    }
    env.pass = env.min_ratio >= env.lower && env.max_ratio <= env.upper;
    v.envelope = env;
    v.pass = v.pass && env.pass;
  }
  return v;
}

Verdict verify_prediction(const MarginPair& margins, const CopulaSpec& spec,
                          const Weights& weights, std::size_t n, std::span<const double> p_grid,
                          std::optional<double> tolerance, std::uint64_t seed,
                          const SimulationOptions& opts) {
  const auto prediction = predict_copula(weighted_margins(margins, weights), spec);
  const auto sample = simulate_aggregate(margins, spec, weights, n, seed, opts);
  return verify_sample(sample.values, prediction, p_grid, tolerance);
}

std::string to_string(CurveTransform t) {
  switch (t) {
    case CurveTransform::LogR: return "log_r";
    case CurveTransform::RawR: return "r";
    case CurveTransform::NegLogDeficit: return "neg_log_deficit";
  }
  return "?";
}

}  // namespace tailagg
