#pragma once

#include <cstdint>
#include <random>

namespace tailagg {

using Rng = std::mt19937_64;

/// Serial reference loop or OpenMP-parallel loop. Both produce identical
/// results for the same seed because work is split into fixed streams.
enum class Execution { Serial, Parallel };

/// Generator for stream `stream` of `seed`. Distinct (seed, stream) pairs give
/// statistically independent generators.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw strictly inside (0, 1) with 53 random bits.
inline double open_uniform(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard exponential draw.
double standard_exponential(Rng& rng);

/// Standard normal draw (Marsaglia polar method, no cached state).
double standard_normal(Rng& rng);

}  // namespace tailagg
