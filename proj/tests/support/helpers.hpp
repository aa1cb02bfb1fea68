#ifndef BATHYLOC_TESTS_HELPERS_HPP
#define BATHYLOC_TESTS_HELPERS_HPP

#include <functional>
#include <vector>

#include "bathyloc/grid.hpp"

namespace testutil {

/// Grid whose cells sample fn(x, y) at cell centers.
inline bathyloc::BathymetryGrid make_fn_grid(int ncols, int nrows, double cell, double ox,
                                             double oy,
                                             const std::function<double(double, double)>& fn) {
  std::vector<double> heights(static_cast<std::size_t>(ncols) * nrows);
  for (int r = 0; r < nrows; ++r) {
    for (int c = 0; c < ncols; ++c) {
      const double x = ox + (c + 0.5) * cell;
      const double y = oy + (r + 0.5) * cell;
      heights[static_cast<std::size_t>(r) * ncols + c] = fn(x, y);
    }
  }
  return bathyloc::BathymetryGrid(ncols, nrows, cell, ox, oy, std::move(heights));
}

inline bathyloc::BathymetryGrid make_constant_grid(int ncols, int nrows, double value,
                                                   double cell = 1.0, double ox = 0.0,
                                                   double oy = 0.0) {
  return make_fn_grid(ncols, nrows, cell, ox, oy, [value](double, double) { return value; });
}

/// Affine lake L = base + gx*x + gy*y (values must stay nonnegative over the
/// grid the caller picks).
inline bathyloc::BathymetryGrid make_affine_grid(int ncols, int nrows, double base, double gx,
                                                 double gy, double cell = 1.0, double ox = 0.0,
                                                 double oy = 0.0) {
  return make_fn_grid(ncols, nrows, cell, ox, oy,
                      [=](double x, double y) { return base + gx * x + gy * y; });
}

} // namespace testutil

#endif
