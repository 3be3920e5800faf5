#include "memflux/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace memflux {

Tensor2 Tensor2::inverse() const {
  const double det = d11 * d22 - d12 * d21;
  if (det == 0.0) throw std::invalid_argument("Tensor2::inverse: singular tensor");
  return {d22 / det, -d12 / det, -d21 / det, d11 / det};
}

Tensor2 Tensor2::operator*(const Tensor2& o) const {
  return {d11 * o.d11 + d12 * o.d21, d11 * o.d12 + d12 * o.d22,
          d21 * o.d11 + d22 * o.d21, d21 * o.d12 + d22 * o.d22};
}

StructuredGrid make_grid(int nx, int ny, double x0, double x1, double y0, double y1) {
  if (nx < 2 || ny < 1)
    throw std::invalid_argument("make_grid: need nx >= 2 and ny >= 1, got nx=" +
                                std::to_string(nx) + " ny=" + std::to_string(ny));
  if (!(x1 > x0) || !(y1 > y0))
    throw std::invalid_argument("make_grid: empty extent");
  StructuredGrid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = (x1 - x0) / nx;
  g.hy = (y1 - y0) / ny;
  g.origin_x = x0;
  g.origin_y = y0;
  return g;
}

int CellMask::count() const {
  int c = 0;
  for (auto m : masked) c += (m != 0);
  return c;
}

CellMask CellMask::all_active(int nx, int ny) {
  CellMask m;
  m.nx = nx;
  m.ny = ny;
  m.masked.assign(static_cast<std::size_t>(nx) * ny, 0);
  return m;
}

TensorField::TensorField(const StructuredGrid& g, const Tensor2& t) : grid(g) {
  const std::size_t n = static_cast<std::size_t>(g.cells());
  d11.assign(n, t.d11);
  d12.assign(n, t.d12);
  d21.assign(n, t.d21);
  d22.assign(n, t.d22);
}

bool TensorField::is_diagonal() const {
  for (double v : d12)
    if (v != 0.0) return false;
  for (double v : d21)
    if (v != 0.0) return false;
  return true;
}

void TensorField::zero_masked(const CellMask& mask) {
  if (mask.empty()) return;
  for (std::size_t id = 0; id < d11.size(); ++id) {
    if (mask.is_masked(static_cast<int>(id))) {
      d11[id] = d12[id] = d21[id] = d22[id] = 0.0;
    }
  }
}

Tensor2 TensorField::active_mean(const CellMask& mask) const {
  Tensor2 t{0.0, 0.0, 0.0, 0.0};
  std::size_t n = 0;
  for (std::size_t id = 0; id < d11.size(); ++id) {
    if (mask.is_masked(static_cast<int>(id))) continue;
    t.d11 += d11[id];
    t.d12 += d12[id];
    t.d21 += d21[id];
    t.d22 += d22[id];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("TensorField::active_mean: no active cells");
  const double s = 1.0 / static_cast<double>(n);
  return {t.d11 * s, t.d12 * s, t.d21 * s, t.d22 * s};
}

void validate_tensor(const TensorField& tensor, const CellMask& mask) {
  for (int id = 0; id < tensor.grid.cells(); ++id) {
    if (mask.is_masked(id)) continue;
    const double a = tensor.d11[id], d = tensor.d22[id];
    const double s = 0.5 * (tensor.d12[id] + tensor.d21[id]);
    // Symmetric part positive definite: positive diagonals and det > 0.
    if (!(a > 0.0) || !(d > 0.0) || !(a * d - s * s > 0.0))
      throw std::invalid_argument("tensor field not positive definite at cell " +
                                  std::to_string(id));
  }
}

namespace {
template <class F>
void for_active(const ScalarField& f, const CellMask& mask, F&& body) {
  for (int id = 0; id < f.grid.cells(); ++id) {
    if (mask.is_masked(id)) continue;
    body(f.values[id]);
  }
}
}  // namespace

double field_max_abs(const ScalarField& f, const CellMask& mask) {
  double m = 0.0;
  for_active(f, mask, [&](double v) { m = std::max(m, std::fabs(v)); });
  return m;
}

double field_min(const ScalarField& f, const CellMask& mask) {
  double m = std::numeric_limits<double>::infinity();
  for_active(f, mask, [&](double v) { m = std::min(m, v); });
  return m;
}

double field_max(const ScalarField& f, const CellMask& mask) {
  double m = -std::numeric_limits<double>::infinity();
  for_active(f, mask, [&](double v) { m = std::max(m, v); });
  return m;
}

double field_mean(const ScalarField& f, const CellMask& mask) {
  double s = 0.0;
  long n = 0;
  for_active(f, mask, [&](double v) { s += v; ++n; });
  return n > 0 ? s / static_cast<double>(n) : 0.0;
}

double field_mass(const ScalarField& f, const CellMask& mask) {
  double s = 0.0;
  for_active(f, mask, [&](double v) { s += v; });
  return s * f.grid.cell_area();
}

double field_l2(const ScalarField& f, const CellMask& mask) {
  double s = 0.0;
  for_active(f, mask, [&](double v) { s += v * v; });
  return std::sqrt(s * f.grid.cell_area());
}

double field_diff_max(const ScalarField& a, const ScalarField& b, const CellMask& mask) {
  double m = 0.0;
  for (int id = 0; id < a.grid.cells(); ++id) {
    if (mask.is_masked(id)) continue;
    m = std::max(m, std::fabs(a.values[id] - b.values[id]));
  }
  return m;
}

}  // namespace memflux
