#pragma once

#include <cstddef>
#include <functional>

namespace tailagg {

struct UnitIntervalMax {
  double argmax = 0.0;
  double value = 0.0;
};

/// Golden-section search for a maximum of `f` on [lo, hi]. Assumes f is
/// unimodal on the bracket; stops when the bracket is narrower than `tol`.
UnitIntervalMax golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                   double tol = 1e-12);

/// Global maximum of `f` over [0, 1]: a scan of `grid + 1` equally spaced
/// points (non-finite values skipped) followed by golden-section refinement
/// inside the cells adjacent to the best grid point. No unimodality is
/// assumed beyond the resolution of the grid.
///
/// Throws InvalidArgument if `f` is non-finite at every grid point.
UnitIntervalMax maximize_unit_interval(const std::function<double(double)>& f,
                                       std::size_t grid = 10000);

}  // namespace tailagg
