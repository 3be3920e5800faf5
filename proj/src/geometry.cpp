#include "memflux/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace memflux {

void PhysicalGeometry::validate() const {
  if (!(ell > 0.0)) throw std::invalid_argument("geometry: ell must be positive");
  if (!(w > 0.0) || !(w < ell))
    throw std::invalid_argument("geometry: membrane width w must satisfy 0 < w < ell");
  if (!(h > 0.0)) throw std::invalid_argument("geometry: h must be positive");
  if (!(eta > 0.0) || !(eta <= h))
    throw std::invalid_argument("geometry: cell height eta must satisfy 0 < eta <= h");
}

MicrostructureSpec MicrostructureSpec::rectangle(double width_frac, double height_frac) {
  MicrostructureSpec m;
  m.shape = Shape::rectangle;
  m.width_fraction = width_frac;
  m.height_fraction = height_frac;
  m.validate();
  return m;
}

MicrostructureSpec MicrostructureSpec::disk(double diameter_frac) {
  MicrostructureSpec m;
  m.shape = Shape::disk;
  m.diameter_fraction = diameter_frac;
  m.validate();
  return m;
}

void MicrostructureSpec::validate() const {
  auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
  if (shape == Shape::rectangle) {
    if (!in_unit(width_fraction) || !in_unit(height_fraction))
      throw std::invalid_argument(
          "microstructure: rectangle fractions must lie strictly inside (0,1)");
  } else {
    if (!in_unit(diameter_fraction))
      throw std::invalid_argument(
          "microstructure: disk diameter fraction must lie strictly inside (0,1)");
  }
}

DimensionlessGeometry nondimensionalize(const PhysicalGeometry& geom) {
  geom.validate();
  DimensionlessGeometry d;
  d.domain_y1 = 2.0 * geom.h / geom.ell;
  d.membrane_half = geom.w / geom.ell;
  d.epsilon = 2.0 * geom.eta / geom.ell;
  // Smallest integer >= h/eta, robust to roundoff of exact divisions.
  const int n_cells = static_cast<int>(std::ceil(geom.h / geom.eta - 1e-9));
  d.cells.reserve(static_cast<std::size_t>(n_cells));
  for (int i = 1; i <= n_cells; ++i) {
    Rect c;
    c.x0 = -d.membrane_half;
    c.x1 = d.membrane_half;
    c.y0 = (i - 1) * d.epsilon;
    c.y1 = std::min(i * d.epsilon, d.domain_y1);
    d.cells.push_back(c);
  }
  return d;
}

StructuredGrid strip_grid(const DimensionlessGeometry& geom, int nx, int ny) {
  return make_grid(nx, ny, -1.0, 1.0, 0.0, geom.domain_y1);
}

Rect obstacle_rect(const Rect& cell, const MicrostructureSpec& micro) {
  Rect o;
  if (micro.shape == MicrostructureSpec::Shape::rectangle) {
    const double hw = 0.5 * micro.width_fraction * cell.width();
    const double hh = 0.5 * micro.height_fraction * cell.height();
    o = {cell.cx() - hw, cell.cx() + hw, cell.cy() - hh, cell.cy() + hh};
  } else {
    const double r = 0.5 * micro.diameter_fraction * std::min(cell.width(), cell.height());
    o = {cell.cx() - r, cell.cx() + r, cell.cy() - r, cell.cy() + r};
  }
  return o;
}

CellMask rasterize_obstacles(const DimensionlessGeometry& geom,
                             const std::optional<MicrostructureSpec>& micro,
                             const StructuredGrid& grid) {
  CellMask mask = CellMask::all_active(grid.nx, grid.ny);
  if (!micro.has_value()) return mask;
  micro->validate();

  if (geom.epsilon / grid.hy < 8.0 - 1e-9)
    throw std::invalid_argument(
        "rasterize_obstacles: under-resolved grid, need >= 8 points per cell height (have " +
        std::to_string(geom.epsilon / grid.hy) + ")");

  for (const Rect& cell : geom.cells) {
    int hits = 0;
    if (micro->shape == MicrostructureSpec::Shape::rectangle) {
      const Rect o = obstacle_rect(cell, *micro);
      for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.yc(j);
        if (y <= o.y0 || y >= o.y1) continue;
        for (int i = 0; i < grid.nx; ++i) {
          const double x = grid.xc(i);
          if (x > o.x0 && x < o.x1) {
            mask.masked[grid.index(i, j)] = 1;
            ++hits;
          }
        }
      }
    } else {
      const double r = 0.5 * micro->diameter_fraction * std::min(cell.width(), cell.height());
      const double cx = cell.cx(), cy = cell.cy();
      for (int j = 0; j < grid.ny; ++j) {
        const double dy = grid.yc(j) - cy;
        if (std::fabs(dy) >= r) continue;
        for (int i = 0; i < grid.nx; ++i) {
          const double dx = grid.xc(i) - cx;
          if (dx * dx + dy * dy < r * r) {
            mask.masked[grid.index(i, j)] = 1;
            ++hits;
          }
        }
      }
    }
    if (hits == 0)
      throw std::invalid_argument(
          "rasterize_obstacles: obstacle in cell [" + std::to_string(cell.y0) + "," +
          std::to_string(cell.y1) + "] maps to zero masked cells (under-resolved grid)");
  }
  return mask;
}

}  // namespace memflux
