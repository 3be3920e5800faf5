#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "memflux/cell_problem.hpp"
#include "memflux/geometry.hpp"

using namespace memflux;

TEST_CASE("nondimensionalization of the reference strip") {
  PhysicalGeometry g{1.0, 0.4, 0.25, 0.08};
  const DimensionlessGeometry d = nondimensionalize(g);
  CHECK(d.domain().x0 == -1.0);
  CHECK(d.domain().x1 == 1.0);
  CHECK(d.domain_y1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(d.membrane_half == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.epsilon == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(d.cells.size() == 5);
  CHECK(d.omega_m().x0 == doctest::Approx(-0.25));
  CHECK(d.omega_m().x1 == doctest::Approx(0.25));
}

TEST_CASE("unit scaling gives a single cell") {
  PhysicalGeometry g{2.0, 1.0, 1.0, 1.0};
  const DimensionlessGeometry d = nondimensionalize(g);
  CHECK(d.domain_y1 == doctest::Approx(1.0));
  CHECK(d.epsilon == doctest::Approx(1.0));
  CHECK(d.cells.size() == 1);
}

TEST_CASE("invalid strips are rejected") {
  CHECK_THROWS_AS(nondimensionalize(PhysicalGeometry{1.0, 0.4, 0.25, 0.5}),
                  std::invalid_argument);  // eta > h
  CHECK_THROWS_AS(nondimensionalize(PhysicalGeometry{1.0, 0.4, 1.0, 0.08}),
                  std::invalid_argument);  // w >= ell
  CHECK_THROWS_AS(nondimensionalize(PhysicalGeometry{0.0, 0.4, 0.25, 0.08}),
                  std::invalid_argument);
}

TEST_CASE("top cell is truncated when h/eta is fractional") {
  PhysicalGeometry g{1.0, 0.4, 0.25, 0.15};
  const DimensionlessGeometry d = nondimensionalize(g);
  REQUIRE(d.cells.size() == 3);  // ceil(0.4 / 0.15)
  CHECK(d.cells[0].y1 - d.cells[0].y0 == doctest::Approx(0.3));
  CHECK(d.cells[2].y0 == doctest::Approx(0.6));
  CHECK(d.cells[2].y1 == doctest::Approx(0.8));  // truncated to 2h/ell
}

TEST_CASE("region areas partition the strip exactly") {
  PhysicalGeometry g{1.3, 0.47, 0.21, 0.077};
  const DimensionlessGeometry d = nondimensionalize(g);
  const double total = d.domain().area();
  const double sum = d.omega_l().area() + d.omega_m().area() + d.omega_r().area();
  CHECK(std::fabs(total - sum) <= 1e-15 * total);
}

TEST_CASE("microstructure fractions must lie strictly inside (0,1)") {
  CHECK_THROWS_AS(MicrostructureSpec::rectangle(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(MicrostructureSpec::rectangle(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MicrostructureSpec::disk(1.2), std::invalid_argument);
  CHECK_NOTHROW(MicrostructureSpec::rectangle(0.5, 0.75));
}

TEST_CASE("rectangle raster on a 16x16 cell marks a centered 8x12 block") {
  // One periodicity cell spanning the whole membrane of a 2x1 strip.
  PhysicalGeometry g{2.0, 1.0, 1.0, 1.0};
  const DimensionlessGeometry d = nondimensionalize(g);
  const StructuredGrid grid = strip_grid(d, 32, 16);  // 16x16 across the unit cell
  const auto micro = MicrostructureSpec::rectangle(0.5, 0.75);
  const CellMask mask = rasterize_obstacles(d, micro, grid);
  CHECK(mask.count() == 8 * 12);
  // centered: columns 12..19 of the 32-wide grid, rows 2..13
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 32; ++i) {
      const bool expect = (i >= 12 && i < 20) && (j >= 2 && j < 14);
      CHECK(mask.is_masked(i, j) == expect);
    }
}

TEST_CASE("absent microstructure yields an empty mask") {
  PhysicalGeometry g{1.0, 0.4, 0.25, 0.08};
  const DimensionlessGeometry d = nondimensionalize(g);
  const StructuredGrid grid = strip_grid(d, 64, 40);
  const CellMask mask = rasterize_obstacles(d, std::nullopt, grid);
  CHECK(mask.count() == 0);
}

TEST_CASE("disk raster area approaches pi/16 of the cell") {
  const StructuredGrid grid = make_grid(64, 64, 0.0, 1.0, 0.0, 1.0);
  const CellMask mask = unit_cell_obstacle_mask(grid, MicrostructureSpec::disk(0.5));
  const double fraction = static_cast<double>(mask.count()) / grid.cells();
  CHECK(std::fabs(fraction - 3.14159265358979323846 / 16.0) <= 0.01);
}

TEST_CASE("masks of centered obstacles are reflection symmetric") {
  for (auto micro : {MicrostructureSpec::rectangle(0.42, 0.66), MicrostructureSpec::disk(0.55)}) {
    const StructuredGrid grid = make_grid(48, 48, 0.0, 1.0, 0.0, 1.0);
    const CellMask mask = unit_cell_obstacle_mask(grid, micro);
    for (int j = 0; j < 48; ++j)
      for (int i = 0; i < 48; ++i) {
        CHECK(mask.is_masked(i, j) == mask.is_masked(47 - i, j));
        CHECK(mask.is_masked(i, j) == mask.is_masked(i, 47 - j));
      }
  }
}

TEST_CASE("raster area converges to the analytic area at first order") {
  const double r = 0.5 * 0.62;
  const double area = 3.14159265358979323846 * r * r;
  const double perimeter = 2.0 * 3.14159265358979323846 * r;
  double prev_err = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const int n = 24 << pass;  // 24, 48, 96
    const StructuredGrid grid = make_grid(n, n, 0.0, 1.0, 0.0, 1.0);
    const CellMask mask = unit_cell_obstacle_mask(grid, MicrostructureSpec::disk(0.62));
    const double h = 1.0 / n;
    const double err = std::fabs(mask.count() * h * h - area);
    CHECK(err <= 2.0 * perimeter * h);  // first-order band
    if (pass > 0) CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("under-resolved rasterization is rejected") {
  PhysicalGeometry g{1.0, 0.4, 0.25, 0.08};
  const DimensionlessGeometry d = nondimensionalize(g);
  // 5 cells of height 0.16 need hy <= 0.02; ny=20 gives hy=0.04.
  const StructuredGrid coarse = strip_grid(d, 64, 20);
  CHECK_THROWS_AS(rasterize_obstacles(d, MicrostructureSpec::rectangle(0.5, 0.75), coarse),
                  std::invalid_argument);
  // Resolution fine enough, but the obstacle is too small to hit any center.
  const StructuredGrid fine = strip_grid(d, 64, 40);
  CHECK_THROWS_AS(rasterize_obstacles(d, MicrostructureSpec::rectangle(0.004, 0.004), fine),
                  std::invalid_argument);
}

TEST_CASE("mask is empty outside the membrane region") {
  PhysicalGeometry g{1.0, 0.4, 0.25, 0.08};
  const DimensionlessGeometry d = nondimensionalize(g);
  const StructuredGrid grid = strip_grid(d, 128, 40);
  const CellMask mask = rasterize_obstacles(d, MicrostructureSpec::rectangle(0.5, 0.75), grid);
  REQUIRE(mask.count() > 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (mask.is_masked(i, j)) {
        CHECK(grid.xc(i) > -d.membrane_half);
        CHECK(grid.xc(i) < d.membrane_half);
      }
}
