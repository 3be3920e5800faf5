// Manufactured fields shared by the unit and acceptance suites.
#ifndef MEMFLUX_TESTS_MANUFACTURED_HPP
#define MEMFLUX_TESTS_MANUFACTURED_HPP

#include <cmath>

#include "memflux/discretization.hpp"
#include "memflux/grid.hpp"

namespace manufactured {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double u_exact(double x, double y) { return std::sin(kTwoPi * x) * std::cos(kTwoPi * y); }

inline memflux::Tensor2 tensor_at(double x, double y) {
  memflux::Tensor2 t;
  t.d11 = 2.0 + 0.5 * std::sin(kTwoPi * x);
  t.d22 = 1.0 + 0.25 * std::cos(kTwoPi * y);
  t.d12 = 0.1;
  t.d21 = 0.1;
  return t;
}

/// -div(D grad u) for the fields above, by hand.
inline double minus_div_flux(double x, double y) {
  const double sx = std::sin(kTwoPi * x), cx = std::cos(kTwoPi * x);
  const double sy = std::sin(kTwoPi * y), cy = std::cos(kTwoPi * y);
  const double ux = kTwoPi * cx * cy;
  const double uy = -kTwoPi * sx * sy;
  const double uxx = -kTwoPi * kTwoPi * sx * cy;
  const double uyy = -kTwoPi * kTwoPi * sx * cy;
  const double uxy = -kTwoPi * kTwoPi * cx * sy;
  const double d11 = 2.0 + 0.5 * sx, d22 = 1.0 + 0.25 * cy;
  const double d11_x = 0.5 * kTwoPi * cx;
  const double d22_y = -0.25 * kTwoPi * sy;
  const double div = (d11_x * ux + d11 * uxx + 0.1 * uxy) + (0.1 * uxy + d22_y * uy + d22 * uyy);
  return -div;
}

/// Max-norm truncation error of the assembled diffusion operator on a
/// fully periodic unit square with n x n cells.
inline double operator_error(int n) {
  using namespace memflux;
  const StructuredGrid grid = make_grid(n, n, 0.0, 1.0, 0.0, 1.0);
  TensorField tensor(grid, Tensor2::identity());
  ScalarField u(grid), exact(grid);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = grid.xc(i), y = grid.yc(j);
      tensor.set(grid.index(i, j), tensor_at(x, y));
      u(i, j) = u_exact(x, y);
      exact(i, j) = minus_div_flux(x, y);
    }
  BoundaryConditions bcs;
  bcs.left = EdgeBc::periodic();
  bcs.right = EdgeBc::periodic();
  bcs.bottom = EdgeBc::periodic();
  bcs.top = EdgeBc::periodic();
  const SparseOperator a = assemble_diffusion(grid, tensor, CellMask::none(), bcs);
  const auto au = a.apply(u.values);
  double err = 0.0;
  for (int id = 0; id < grid.cells(); ++id)
    err = std::max(err, std::fabs(au[id] - exact.values[id]));
  return err;
}

}  // namespace manufactured

#endif
