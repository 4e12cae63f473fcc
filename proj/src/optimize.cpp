#include "tailagg/optimize.hpp"

#include <cmath>
#include <limits>

#include "tailagg/errors.hpp"

namespace tailagg {

namespace {

// Non-finite evaluations rank below every finite one.
double finite_or_lowest(double v) {
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

}  // namespace

UnitIntervalMax golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                   double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = finite_or_lowest(f(c));
  double fd = finite_or_lowest(f(d));
  for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = finite_or_lowest(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = finite_or_lowest(f(d));
    }
  }
  return fc >= fd ? UnitIntervalMax{c, fc} : UnitIntervalMax{d, fd};
}

UnitIntervalMax maximize_unit_interval(const std::function<double(double)>& f, std::size_t grid) {
  if (grid < 2) throw InvalidArgument("maximize_unit_interval needs at least 2 grid cells");
  const double step = 1.0 / static_cast<double>(grid);
  std::size_t best = grid + 1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= grid; ++i) {
    const double v = f(static_cast<double>(i) * step);
    if (std::isfinite(v) && (best > grid || v > best_value)) {
      best = i;
      best_value = v;
    }
  }
  if (best > grid) throw InvalidArgument("maximize_unit_interval: f is non-finite everywhere");

  UnitIntervalMax result{static_cast<double>(best) * step, best_value};
  const double lo = best == 0 ? 0.0 : static_cast<double>(best - 1) * step;
  const double hi = best == grid ? 1.0 : static_cast<double>(best + 1) * step;
  const auto refined = golden_section_max(f, lo, hi);
  if (refined.value > result.value) result = refined;
  return result;
}

}  // namespace tailagg
