#ifndef MEMFLUX_GRID_HPP
#define MEMFLUX_GRID_HPP

#include <cstdint>
#include <vector>

namespace memflux {

/// A 2x2 tensor, row-major entries.
struct Tensor2 {
  double d11 = 1.0, d12 = 0.0;
  double d21 = 0.0, d22 = 1.0;

  static Tensor2 diagonal(double a, double b) { return {a, 0.0, 0.0, b}; }
  static Tensor2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  bool is_diagonal() const { return d12 == 0.0 && d21 == 0.0; }
  Tensor2 inverse() const;
  Tensor2 operator*(const Tensor2& o) const;
};

/// Uniform cell-centered grid over [origin_x, origin_x + nx*hx] x
/// [origin_y, origin_y + ny*hy].  Cell (i,j) has center
/// (origin_x + (i+1/2)hx, origin_y + (j+1/2)hy); storage is row-major
/// with index j*nx + i.
struct StructuredGrid {
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  double origin_x = 0.0, origin_y = 0.0;

  int cells() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  double xc(int i) const { return origin_x + (i + 0.5) * hx; }
  double yc(int j) const { return origin_y + (j + 0.5) * hy; }
  double width() const { return nx * hx; }
  double height() const { return ny * hy; }
  double cell_area() const { return hx * hy; }
};

/// Builds a grid covering [x0,x1] x [y0,y1] exactly with nx x ny cells.
/// Throws std::invalid_argument on nonpositive extents or nx < 2, ny < 1.
StructuredGrid make_grid(int nx, int ny, double x0, double x1, double y0, double y1);

/// Marks excluded (obstacle) cells of a grid.  Empty mask = all active.
struct CellMask {
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> masked;  // 1 = excluded

  bool empty() const { return masked.empty(); }
  bool is_masked(int i, int j) const {
    return !masked.empty() && masked[static_cast<std::size_t>(j) * nx + i] != 0;
  }
  bool is_masked(int id) const { return !masked.empty() && masked[id] != 0; }
  int count() const;
  static CellMask none() { return {}; }
  static CellMask all_active(int nx, int ny);
};

/// Cell-centered scalar values on a grid.  Masked cells hold 0 and are
/// excluded from norms, means and mass.
struct ScalarField {
  StructuredGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const StructuredGrid& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.cells()), fill) {}

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
};

/// Per-cell 2x2 tensor entries.
struct TensorField {
  StructuredGrid grid;
  std::vector<double> d11, d12, d21, d22;

  TensorField() = default;
  TensorField(const StructuredGrid& g, const Tensor2& t);

  Tensor2 at(int id) const { return {d11[id], d12[id], d21[id], d22[id]}; }
  void set(int id, const Tensor2& t) {
    d11[id] = t.d11; d12[id] = t.d12; d21[id] = t.d21; d22[id] = t.d22;
  }
  bool is_diagonal() const;
  /// Zeroes all entries of masked cells (zero extension onto obstacles).
  void zero_masked(const CellMask& mask);
  /// Mean tensor over active cells.
  Tensor2 active_mean(const CellMask& mask) const;
};

/// Checks d11, d22 > 0 and positive-definite symmetric part on every
/// active cell; throws std::invalid_argument naming the first bad cell.
void validate_tensor(const TensorField& tensor, const CellMask& mask);

double field_max_abs(const ScalarField& f, const CellMask& mask = CellMask::none());
double field_min(const ScalarField& f, const CellMask& mask = CellMask::none());
double field_max(const ScalarField& f, const CellMask& mask = CellMask::none());
double field_mean(const ScalarField& f, const CellMask& mask = CellMask::none());
/// Integral of the field over active cells (sum * cell area).
double field_mass(const ScalarField& f, const CellMask& mask = CellMask::none());
double field_l2(const ScalarField& f, const CellMask& mask = CellMask::none());
/// Max-norm of the difference of two fields on the same grid.
double field_diff_max(const ScalarField& a, const ScalarField& b,
                      const CellMask& mask = CellMask::none());

}  // namespace memflux

#endif
