#include "tailagg/random.hpp"

#include <cmath>

namespace tailagg {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x7a11a66u};
  return Rng(seq);
}

double standard_exponential(Rng& rng) { return -std::log(open_uniform(rng)); }

double standard_normal(Rng& rng) {
  // One of the pair is discarded so the generator carries no hidden state.
  for (;;) {
    const double a = 2.0 * open_uniform(rng) - 1.0;
    const double b = 2.0 * open_uniform(rng) - 1.0;
    const double s = a * a + b * b;
    if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace tailagg
