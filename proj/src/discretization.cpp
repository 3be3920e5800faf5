#include "memflux/discretization.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace memflux {

DriftPolynomial DriftPolynomial::dimensionless(std::vector<double> c) {
  DriftPolynomial d;
  d.c_ = std::move(c);
  return d;
}

DriftPolynomial DriftPolynomial::from_physical(const std::vector<double>& a, double ell,
                                               double d1) {
  if (!(ell > 0.0) || !(d1 > 0.0))
    throw std::invalid_argument("DriftPolynomial::from_physical: need ell > 0 and d1 > 0");
  const double s = ell / (2.0 * d1);
  std::vector<double> c(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = s * a[k];
  DriftPolynomial d;
  d.c_ = std::move(c);
  return d;
}

DriftPolynomial DriftPolynomial::logistic(double b, double ell, double d1) {
  return from_physical({-b, b}, ell, d1);
}

double DriftPolynomial::g(double u) const {
  // Horner over g(u)/u, then multiply by u so g(0) = 0 exactly.
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) acc = acc * u + c_[k];
  return acc * u;
}

double DriftPolynomial::dg(double u) const {
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) acc = acc * u + static_cast<double>(k + 1) * c_[k];
  return acc;
}

double DriftPolynomial::max_abs_dg(double lo, double hi) const {
  if (is_zero()) return 0.0;
  if (lo > hi) std::swap(lo, hi);
  double m = std::max(std::fabs(dg(lo)), std::fabs(dg(hi)));
  if (c_.size() <= 2) return m;  // g' affine: extrema at endpoints
  const int samples = 512;
  for (int k = 1; k < samples; ++k) {
    const double u = lo + (hi - lo) * k / samples;
    m = std::max(m, std::fabs(dg(u)));
  }
  return m;
}

bool DriftPolynomial::is_zero() const {
  for (double v : c_)
    if (v != 0.0) return false;
  return true;
}

void validate_bcs(const StructuredGrid& grid, const BoundaryConditions& bcs) {
  const bool px = bcs.left.kind == BcKind::periodic || bcs.right.kind == BcKind::periodic;
  if (px && (bcs.left.kind != bcs.right.kind))
    throw std::invalid_argument("boundary conditions: periodic left/right edges must pair");
  const bool py = bcs.bottom.kind == BcKind::periodic || bcs.top.kind == BcKind::periodic;
  if (py && (bcs.bottom.kind != bcs.top.kind))
    throw std::invalid_argument("boundary conditions: periodic bottom/top edges must pair");
  auto check_flux = [](const EdgeBc& e, int expect, const char* name) {
    if (e.kind != BcKind::interface_flux) return;
    if (static_cast<int>(e.coupling_data.size()) != expect)
      throw std::invalid_argument(std::string("boundary conditions: interface flux on ") + name +
                                  " has wrong length");
    if (e.coupling_coeff < 0.0)
      throw std::invalid_argument(
          std::string("boundary conditions: interface coupling coefficient on ") + name +
          " must be nonnegative");
  };
  check_flux(bcs.left, grid.ny, "left");
  check_flux(bcs.right, grid.ny, "right");
  check_flux(bcs.bottom, grid.nx, "bottom");
  check_flux(bcs.top, grid.nx, "top");
  if (py && grid.ny < 2)
    throw std::invalid_argument("boundary conditions: periodic in y needs ny >= 2");
}

namespace {

double harmonic(double a, double b) {
  return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
}

/// Shared face/neighbor bookkeeping for assembly, drift and diagnostics.
struct FaceContext {
  const StructuredGrid& grid;
  const TensorField& tensor;
  const CellMask& mask;
  const BoundaryConditions& bcs;

  bool periodic_x() const { return bcs.left.kind == BcKind::periodic; }
  bool periodic_y() const { return bcs.bottom.kind == BcKind::periodic; }

  bool active(int i, int j) const { return !mask.is_masked(i, j); }

  /// Resolves (i,j) with periodic wrap; false when outside a
  /// non-periodic edge or masked.
  bool resolve(int i, int j, int& ri, int& rj) const {
    if (i < 0) {
      if (!periodic_x()) return false;
      i += grid.nx;
    } else if (i >= grid.nx) {
      if (!periodic_x()) return false;
      i -= grid.nx;
    }
    if (j < 0) {
      if (!periodic_y()) return false;
      j += grid.ny;
    } else if (j >= grid.ny) {
      if (!periodic_y()) return false;
      j -= grid.ny;
    }
    if (mask.is_masked(i, j)) return false;
    ri = i;
    rj = j;
    return true;
  }

  /// Tangential derivative du/dy at the x-face between columns ci0 and
  /// ci1 in row j, as sparse weights over cell ids.  Central per
  /// column, one-sided next to masks/walls, averaged over both
  /// columns.
  void dudy_weights_xface(int ci0, int ci1, int j,
                          std::array<std::pair<int, double>, 8>& w, int& n) const {
    n = 0;
    const std::array<int, 2> cols{ci0, ci1};
    for (int c : cols) {
      int ui = 0, uj = 0, li = 0, lj = 0;
      const bool up = resolve(c, j + 1, ui, uj);
      const bool lo = resolve(c, j - 1, li, lj);
      if (up && lo) {
        w[n++] = {grid.index(ui, uj), 0.5 / (2.0 * grid.hy)};
        w[n++] = {grid.index(li, lj), -0.5 / (2.0 * grid.hy)};
      } else if (up) {
        w[n++] = {grid.index(ui, uj), 0.5 / grid.hy};
        w[n++] = {grid.index(c, j), -0.5 / grid.hy};
      } else if (lo) {
        w[n++] = {grid.index(c, j), 0.5 / grid.hy};
        w[n++] = {grid.index(li, lj), -0.5 / grid.hy};
      }
    }
  }

  /// Tangential derivative du/dx at the y-face between rows cj0, cj1
  /// in column i.
  void dudx_weights_yface(int i, int cj0, int cj1,
                          std::array<std::pair<int, double>, 8>& w, int& n) const {
    n = 0;
    const std::array<int, 2> rows{cj0, cj1};
    for (int r : rows) {
      int ei = 0, ej = 0, wi = 0, wj = 0;
      const bool east = resolve(i + 1, r, ei, ej);
      const bool west = resolve(i - 1, r, wi, wj);
      if (east && west) {
        w[n++] = {grid.index(ei, ej), 0.5 / (2.0 * grid.hx)};
        w[n++] = {grid.index(wi, wj), -0.5 / (2.0 * grid.hx)};
      } else if (east) {
        w[n++] = {grid.index(ei, ej), 0.5 / grid.hx};
        w[n++] = {grid.index(i, r), -0.5 / grid.hx};
      } else if (west) {
        w[n++] = {grid.index(i, r), 0.5 / grid.hx};
        w[n++] = {grid.index(wi, wj), -0.5 / grid.hx};
      }
    }
  }
};

/// Upwind face value by the sign of the advective coefficient
/// -c g'((uw+ue)/2): positive speed transports from the low side.
double upwind_value(double c, const DriftPolynomial& g, double uw, double ue) {
  const double speed = -c * g.dg(0.5 * (uw + ue));
  return speed >= 0.0 ? uw : ue;
}

}  // namespace

SparseOperator assemble_diffusion(const StructuredGrid& grid, const TensorField& tensor,
                                  const CellMask& mask, const BoundaryConditions& bcs) {
  validate_bcs(grid, bcs);
  validate_tensor(tensor, mask);
  const FaceContext fc{grid, tensor, mask, bcs};
  TripletBuilder builder(grid.cells());
  const double ax = 1.0 / (grid.hx * grid.hx);
  const double ay = 1.0 / (grid.hy * grid.hy);

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (mask.is_masked(i, j)) builder.add(grid.index(i, j), grid.index(i, j), 1.0);

  std::array<std::pair<int, double>, 8> w;
  int nw = 0;

  // x-faces between (iw,j) and (ie,j); handles the periodic wrap face.
  auto x_face = [&](int iw, int ie, int j) {
    if (!fc.active(iw, j) || !fc.active(ie, j)) return;
    const int idw = grid.index(iw, j), ide = grid.index(ie, j);
    const double tf = harmonic(tensor.d11[idw], tensor.d11[ide]) * ax;
    builder.add(idw, idw, tf);
    builder.add(idw, ide, -tf);
    builder.add(ide, ide, tf);
    builder.add(ide, idw, -tf);
    const double d12f = 0.5 * (tensor.d12[idw] + tensor.d12[ide]);
    if (d12f != 0.0) {
      fc.dudy_weights_xface(iw, ie, j, w, nw);
      for (int k = 0; k < nw; ++k) {
        builder.add(idw, w[k].first, -d12f * w[k].second / grid.hx);
        builder.add(ide, w[k].first, d12f * w[k].second / grid.hx);
      }
    }
  };
  // y-faces between (i,js) and (i,jn).
  auto y_face = [&](int i, int js, int jn) {
    if (!fc.active(i, js) || !fc.active(i, jn)) return;
    const int ids = grid.index(i, js), idn = grid.index(i, jn);
    const double tf = harmonic(tensor.d22[ids], tensor.d22[idn]) * ay;
    builder.add(ids, ids, tf);
    builder.add(ids, idn, -tf);
    builder.add(idn, idn, tf);
    builder.add(idn, ids, -tf);
    const double d21f = 0.5 * (tensor.d21[ids] + tensor.d21[idn]);
    if (d21f != 0.0) {
      fc.dudx_weights_yface(i, js, jn, w, nw);
      for (int k = 0; k < nw; ++k) {
        builder.add(ids, w[k].first, -d21f * w[k].second / grid.hy);
        builder.add(idn, w[k].first, d21f * w[k].second / grid.hy);
      }
    }
  };

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i + 1 < grid.nx; ++i) x_face(i, i + 1, j);
  for (int j = 0; j + 1 < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) y_face(i, j, j + 1);
  if (fc.periodic_x())
    for (int j = 0; j < grid.ny; ++j) x_face(grid.nx - 1, 0, j);
  if (fc.periodic_y())
    for (int i = 0; i < grid.nx; ++i) y_face(i, grid.ny - 1, 0);

  // Dirichlet half-cell transmissibilities (data lands in the rhs).
  if (bcs.left.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (fc.active(0, j)) {
        const int id = grid.index(0, j);
        builder.add(id, id, 2.0 * tensor.d11[id] * ax);
      }
  if (bcs.right.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (fc.active(grid.nx - 1, j)) {
        const int id = grid.index(grid.nx - 1, j);
        builder.add(id, id, 2.0 * tensor.d11[id] * ax);
      }
  if (bcs.bottom.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (fc.active(i, 0)) {
        const int id = grid.index(i, 0);
        builder.add(id, id, 2.0 * tensor.d22[id] * ay);
      }
  if (bcs.top.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (fc.active(i, grid.ny - 1)) {
        const int id = grid.index(i, grid.ny - 1);
        builder.add(id, id, 2.0 * tensor.d22[id] * ay);
      }

  // Robin-type interface coupling contributes to the diagonal.
  auto robin_vertical = [&](const EdgeBc& bc, int i) {
    if (bc.kind != BcKind::interface_flux || bc.coupling_coeff == 0.0) return;
    for (int j = 0; j < grid.ny; ++j)
      if (fc.active(i, j)) builder.add(grid.index(i, j), grid.index(i, j),
                                       bc.coupling_coeff / grid.hx);
  };
  auto robin_horizontal = [&](const EdgeBc& bc, int j) {
    if (bc.kind != BcKind::interface_flux || bc.coupling_coeff == 0.0) return;
    for (int i = 0; i < grid.nx; ++i)
      if (fc.active(i, j)) builder.add(grid.index(i, j), grid.index(i, j),
                                       bc.coupling_coeff / grid.hy);
  };
  robin_vertical(bcs.left, 0);
  robin_vertical(bcs.right, grid.nx - 1);
  robin_horizontal(bcs.bottom, 0);
  robin_horizontal(bcs.top, grid.ny - 1);

  return builder.compress();
}

void apply_bc(const StructuredGrid& grid, const TensorField& tensor, const CellMask& mask,
              const BoundaryConditions& bcs, std::vector<double>& rhs) {
  validate_bcs(grid, bcs);
  const double ax = 1.0 / (grid.hx * grid.hx);
  const double ay = 1.0 / (grid.hy * grid.hy);
  auto active = [&](int i, int j) { return !mask.is_masked(i, j); };

  if (bcs.left.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (active(0, j)) rhs[grid.index(0, j)] += 2.0 * tensor.d11[grid.index(0, j)] * ax * bcs.left.value;
  if (bcs.right.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (active(grid.nx - 1, j)) {
        const int id = grid.index(grid.nx - 1, j);
        rhs[id] += 2.0 * tensor.d11[id] * ax * bcs.right.value;
      }
  if (bcs.bottom.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (active(i, 0)) rhs[grid.index(i, 0)] += 2.0 * tensor.d22[grid.index(i, 0)] * ay * bcs.bottom.value;
  if (bcs.top.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (active(i, grid.ny - 1)) {
        const int id = grid.index(i, grid.ny - 1);
        rhs[id] += 2.0 * tensor.d22[id] * ay * bcs.top.value;
      }

  // Interface coupling data: outward flux = coeff*u_cell - data.
  if (bcs.left.kind == BcKind::interface_flux)
    for (int j = 0; j < grid.ny; ++j)
      if (active(0, j)) rhs[grid.index(0, j)] += bcs.left.coupling_data[j] / grid.hx;
  if (bcs.right.kind == BcKind::interface_flux)
    for (int j = 0; j < grid.ny; ++j)
      if (active(grid.nx - 1, j))
        rhs[grid.index(grid.nx - 1, j)] += bcs.right.coupling_data[j] / grid.hx;
  if (bcs.bottom.kind == BcKind::interface_flux)
    for (int i = 0; i < grid.nx; ++i)
      if (active(i, 0)) rhs[grid.index(i, 0)] += bcs.bottom.coupling_data[i] / grid.hy;
  if (bcs.top.kind == BcKind::interface_flux)
    for (int i = 0; i < grid.nx; ++i)
      if (active(i, grid.ny - 1))
        rhs[grid.index(i, grid.ny - 1)] += bcs.top.coupling_data[i] / grid.hy;
}

ScalarField drift_divergence(const StructuredGrid& grid, const TensorField& tensor,
                             const DriftPolynomial& drift, const ScalarField& u,
                             const CellMask& mask, const BoundaryConditions& bcs) {
  validate_bcs(grid, bcs);
  ScalarField r(grid, 0.0);
  if (drift.is_zero()) return r;
  const FaceContext fc{grid, tensor, mask, bcs};

  auto x_face = [&](int iw, int ie, int j) {
    if (!fc.active(iw, j) || !fc.active(ie, j)) return;
    const int idw = grid.index(iw, j), ide = grid.index(ie, j);
    const double df = harmonic(tensor.d11[idw], tensor.d11[ide]);
    if (df == 0.0) return;
    const double phi = df * drift.g(upwind_value(df, drift, u.values[idw], u.values[ide]));
    r.values[idw] += phi / grid.hx;
    r.values[ide] -= phi / grid.hx;
  };
  auto y_face = [&](int i, int js, int jn) {
    if (!fc.active(i, js) || !fc.active(i, jn)) return;
    const int ids = grid.index(i, js), idn = grid.index(i, jn);
    const double df = 0.5 * (tensor.d21[ids] + tensor.d21[idn]);
    if (df == 0.0) return;
    const double phi = df * drift.g(upwind_value(df, drift, u.values[ids], u.values[idn]));
    r.values[ids] += phi / grid.hy;
    r.values[idn] -= phi / grid.hy;
  };

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i + 1 < grid.nx; ++i) x_face(i, i + 1, j);
  for (int j = 0; j + 1 < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) y_face(i, j, j + 1);
  if (fc.periodic_x())
    for (int j = 0; j < grid.ny; ++j) x_face(grid.nx - 1, 0, j);
  if (fc.periodic_y())
    for (int i = 0; i < grid.nx; ++i) y_face(i, grid.ny - 1, 0);

  // Dirichlet faces carry the advective flux of the boundary trace.
  if (bcs.left.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (fc.active(0, j)) {
        const int id = grid.index(0, j);
        const double df = tensor.d11[id];
        const double phi = df * drift.g(upwind_value(df, drift, bcs.left.value, u.values[id]));
        r.values[id] -= phi / grid.hx;
      }
  if (bcs.right.kind == BcKind::dirichlet)
    for (int j = 0; j < grid.ny; ++j)
      if (fc.active(grid.nx - 1, j)) {
        const int id = grid.index(grid.nx - 1, j);
        const double df = tensor.d11[id];
        const double phi = df * drift.g(upwind_value(df, drift, u.values[id], bcs.right.value));
        r.values[id] += phi / grid.hx;
      }
  if (bcs.bottom.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (fc.active(i, 0)) {
        const int id = grid.index(i, 0);
        const double df = tensor.d21[id];
        if (df == 0.0) continue;
        const double phi = df * drift.g(upwind_value(df, drift, bcs.bottom.value, u.values[id]));
        r.values[id] -= phi / grid.hy;
      }
  if (bcs.top.kind == BcKind::dirichlet)
    for (int i = 0; i < grid.nx; ++i)
      if (fc.active(i, grid.ny - 1)) {
        const int id = grid.index(i, grid.ny - 1);
        const double df = tensor.d21[id];
        if (df == 0.0) continue;
        const double phi = df * drift.g(upwind_value(df, drift, u.values[id], bcs.top.value));
        r.values[id] += phi / grid.hy;
      }

  return r;
}

double drift_cfl_dt(const StructuredGrid& grid, const TensorField& tensor,
                    const DriftPolynomial& drift, double lo, double hi) {
  if (drift.is_zero()) return std::numeric_limits<double>::infinity();
  const double m = drift.max_abs_dg(lo, hi);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  double d11_max = 0.0, d21_max = 0.0;
  for (std::size_t id = 0; id < tensor.d11.size(); ++id) {
    d11_max = std::max(d11_max, std::fabs(tensor.d11[id]));
    d21_max = std::max(d21_max, std::fabs(tensor.d21[id]));
  }
  const double rate = d11_max * m / grid.hx + d21_max * m / grid.hy;
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

double column_total_flux(const StructuredGrid& grid, const TensorField& tensor,
                         const DriftPolynomial& drift, const ScalarField& u_diff,
                         const ScalarField& u_drift, const CellMask& mask,
                         const BoundaryConditions& bcs, int face_i) {
  if (face_i <= 0 || face_i >= grid.nx)
    throw std::invalid_argument("column_total_flux: face index must be interior");
  const FaceContext fc{grid, tensor, mask, bcs};
  std::array<std::pair<int, double>, 8> w;
  int nw = 0;
  double total = 0.0;
  const int iw = face_i - 1, ie = face_i;
  for (int j = 0; j < grid.ny; ++j) {
    if (!fc.active(iw, j) || !fc.active(ie, j)) continue;
    const int idw = grid.index(iw, j), ide = grid.index(ie, j);
    const double tf = harmonic(tensor.d11[idw], tensor.d11[ide]);
    double grad_flux = tf * (u_diff.values[ide] - u_diff.values[idw]) / grid.hx;
    const double d12f = 0.5 * (tensor.d12[idw] + tensor.d12[ide]);
    if (d12f != 0.0) {
      fc.dudy_weights_xface(iw, ie, j, w, nw);
      double dudy = 0.0;
      for (int k = 0; k < nw; ++k) dudy += w[k].second * u_diff.values[w[k].first];
      grad_flux += d12f * dudy;
    }
    double adv_flux = 0.0;
    if (!drift.is_zero() && tf != 0.0)
      adv_flux = tf * drift.g(upwind_value(tf, drift, u_drift.values[idw], u_drift.values[ide]));
    total += (-grad_flux - adv_flux) * grid.hy;
  }
  return total;
}

BoundaryFluxes boundary_outflow(const StructuredGrid& grid, const TensorField& tensor,
                                const DriftPolynomial& drift, const ScalarField& u_diff,
                                const ScalarField& u_drift, const CellMask& mask,
                                const BoundaryConditions& bcs) {
  BoundaryFluxes out;
  auto active = [&](int i, int j) { return !mask.is_masked(i, j); };
  const bool has_drift = !drift.is_zero();

  auto vertical_edge = [&](const EdgeBc& bc, int i, bool left_edge) {
    double total = 0.0;
    if (bc.kind == BcKind::dirichlet) {
      for (int j = 0; j < grid.ny; ++j) {
        if (!active(i, j)) continue;
        const int id = grid.index(i, j);
        const double d = tensor.d11[id];
        double f = d * (u_diff.values[id] - bc.value) / (0.5 * grid.hx);
        if (has_drift) {
          const double uw = left_edge ? bc.value : u_drift.values[id];
          const double ue = left_edge ? u_drift.values[id] : bc.value;
          const double adv = d * drift.g(upwind_value(d, drift, uw, ue));
          f += left_edge ? adv : -adv;
        }
        total += f * grid.hy;
      }
    } else if (bc.kind == BcKind::interface_flux) {
      for (int j = 0; j < grid.ny; ++j)
        if (active(i, j))
          total += (bc.coupling_coeff * u_diff.values[grid.index(i, j)] - bc.coupling_data[j]) *
                   grid.hy;
    }
    return total;
  };
  auto horizontal_edge = [&](const EdgeBc& bc, int j, bool bottom_edge) {
    double total = 0.0;
    if (bc.kind == BcKind::dirichlet) {
      for (int i = 0; i < grid.nx; ++i) {
        if (!active(i, j)) continue;
        const int id = grid.index(i, j);
        const double d = tensor.d22[id];
        double f = d * (u_diff.values[id] - bc.value) / (0.5 * grid.hy);
        if (has_drift && tensor.d21[id] != 0.0) {
          const double c = tensor.d21[id];
          const double us = bottom_edge ? bc.value : u_drift.values[id];
          const double un = bottom_edge ? u_drift.values[id] : bc.value;
          const double adv = c * drift.g(upwind_value(c, drift, us, un));
          f += bottom_edge ? adv : -adv;
        }
        total += f * grid.hx;
      }
    } else if (bc.kind == BcKind::interface_flux) {
      for (int i = 0; i < grid.nx; ++i)
        if (active(i, j))
          total += (bc.coupling_coeff * u_diff.values[grid.index(i, j)] - bc.coupling_data[i]) *
                   grid.hx;
    }
    return total;
  };

  out.left = vertical_edge(bcs.left, 0, true);
  out.right = vertical_edge(bcs.right, grid.nx - 1, false);
  out.bottom = horizontal_edge(bcs.bottom, 0, true);
  out.top = horizontal_edge(bcs.top, grid.ny - 1, false);
  return out;
}

}  // namespace memflux
