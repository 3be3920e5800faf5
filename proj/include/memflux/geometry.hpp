#ifndef MEMFLUX_GEOMETRY_HPP
#define MEMFLUX_GEOMETRY_HPP

#include <optional>
#include <vector>

#include "memflux/grid.hpp"

namespace memflux {

/// Strip geometry in physical units (cm): horizontal length ell,
/// height h, membrane width w, periodicity-cell height eta.
struct PhysicalGeometry {
  double ell = 1.0;
  double h = 0.4;
  double w = 0.25;
  double eta = 0.08;

  /// Throws std::invalid_argument unless ell > 0, 0 < w < ell and
  /// 0 < eta <= h.
  void validate() const;
};

/// Periodic obstacle placed at the center of every membrane cell.
/// Fractions are relative to the cell and must lie strictly inside
/// (0,1) so the obstacle never touches the cell boundary.
struct MicrostructureSpec {
  enum class Shape { rectangle, disk };
  Shape shape = Shape::rectangle;
  double width_fraction = 0.5;    // rectangle, relative to cell width
  double height_fraction = 0.75;  // rectangle, relative to cell height
  double diameter_fraction = 0.5; // disk, relative to the cell's short side

  static MicrostructureSpec rectangle(double width_frac, double height_frac);
  static MicrostructureSpec disk(double diameter_frac);
  void validate() const;
};

struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Dimensionless strip [-1,1] x [0, 2h/ell] after X = 2x/ell, with the
/// membrane region [-w/ell, w/ell] and the periodicity cells stacked
/// bottom to top (the top cell is truncated when h/eta is not an
/// integer).
struct DimensionlessGeometry {
  double domain_y1 = 0.0;     // 2h/ell
  double membrane_half = 0.0; // w/ell
  double epsilon = 0.0;       // 2*eta/ell
  std::vector<Rect> cells;

  Rect domain() const { return {-1.0, 1.0, 0.0, domain_y1}; }
  Rect omega_l() const { return {-1.0, -membrane_half, 0.0, domain_y1}; }
  Rect omega_m() const { return {-membrane_half, membrane_half, 0.0, domain_y1}; }
  Rect omega_r() const { return {membrane_half, 1.0, 0.0, domain_y1}; }
};

/// Maps the physical strip to dimensionless coordinates and lays out
/// the membrane cells.
DimensionlessGeometry nondimensionalize(const PhysicalGeometry& geom);

/// Grid covering the dimensionless strip exactly.
StructuredGrid strip_grid(const DimensionlessGeometry& geom, int nx, int ny);

/// Marks grid cells whose centers lie inside any obstacle.  Requires
/// at least 8 grid points per cell height; an obstacle that maps to
/// zero masked cells is reported as under-resolved.  Without a
/// microstructure the mask is empty.
CellMask rasterize_obstacles(const DimensionlessGeometry& geom,
                             const std::optional<MicrostructureSpec>& micro,
                             const StructuredGrid& grid);

/// The obstacle footprint of one cell; disks are returned as their
/// bounding square for sizing checks.
Rect obstacle_rect(const Rect& cell, const MicrostructureSpec& micro);

}  // namespace memflux

#endif
