#include <doctest.h>

#include <cmath>

#include "memflux/errors.hpp"
#include "memflux/geometry.hpp"
#include "memflux/micro_solver.hpp"
#include "oracles.hpp"

using namespace memflux;

namespace {

/// Independent dense IMEX step: the same scheme written from scratch
/// (diagonal tensor, Dirichlet left/right, zero-flux top/bottom, no
/// mask), advanced with Gaussian elimination.
std::vector<double> dense_imex_step(const StructuredGrid& g, double d1v, double d2v,
                                    const DriftPolynomial& drift, double ul, double ur,
                                    const std::vector<double>& u, double dt) {
  const int n = g.cells();
  oracles::Dense a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
  const double ax = d1v / (g.hx * g.hx), ay = d2v / (g.hy * g.hy);
  auto id = [&](int i, int j) { return j * g.nx + i; };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int c = id(i, j);
      a[c][c] += 1.0 / dt;
      rhs[c] += u[c] / dt;
      if (i > 0) {
        a[c][c] += ax;
        a[c][id(i - 1, j)] -= ax;
      } else {
        a[c][c] += 2.0 * ax;
        rhs[c] += 2.0 * ax * ul;
      }
      if (i + 1 < g.nx) {
        a[c][c] += ax;
        a[c][id(i + 1, j)] -= ax;
      } else {
        a[c][c] += 2.0 * ax;
        rhs[c] += 2.0 * ax * ur;
      }
      if (j > 0) {
        a[c][c] += ay;
        a[c][id(i, j - 1)] -= ay;
      }
      if (j + 1 < g.ny) {
        a[c][c] += ay;
        a[c][id(i, j + 1)] -= ay;
      }
    }
  // explicit upwinded drift, fluxes phi = d1 g(upwind)
  auto upwind = [&](double uw, double ue) {
    return (-d1v * drift.dg(0.5 * (uw + ue)) >= 0.0) ? uw : ue;
  };
  for (int j = 0; j < g.ny; ++j) {
    for (int fi = 0; fi <= g.nx; ++fi) {
      double phi = 0.0;
      if (fi == 0) {
        phi = d1v * drift.g(upwind(ul, u[id(0, j)]));
      } else if (fi == g.nx) {
        phi = d1v * drift.g(upwind(u[id(g.nx - 1, j)], ur));
      } else {
        phi = d1v * drift.g(upwind(u[id(fi - 1, j)], u[id(fi, j)]));
      }
      if (fi > 0) rhs[id(fi - 1, j)] += phi / g.hx;
      if (fi < g.nx) rhs[id(fi, j)] -= phi / g.hx;
    }
  }
  return oracles::dense_solve(a, rhs);
}

MicroProblem reference_micro(int nx, int ny, bool with_obstacles, double b) {
  PhysicalGeometry pg{1.0, 0.4, 0.25, 0.08};
  const DimensionlessGeometry geom = nondimensionalize(pg);
  MicroProblem p;
  p.grid = strip_grid(geom, nx, ny);
  p.mask = with_obstacles
               ? rasterize_obstacles(geom, MicrostructureSpec::rectangle(0.5, 0.75), p.grid)
               : CellMask::none();
  p.tensor = TensorField(p.grid, Tensor2::diagonal(1.0, 0.1));
  p.drift = b != 0.0 ? DriftPolynomial::logistic(b, 1.0, 10.0) : DriftPolynomial::none();
  p.source = ScalarField(p.grid, 0.0);
  p.bcs = BoundaryConditions::dirichlet_lr(0.0, 5.8e-5);
  p.initial = ScalarField(p.grid, 0.0);
  p.t_end = 400.0;
  p.dt = 0.5;
  return p;
}

}  // namespace

TEST_CASE("constant equilibrium state is a fixed point") {
  const StructuredGrid grid = make_grid(10, 6, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::none(), 0.42, 0.42);
  const ScalarField u(grid, 0.42);
  const ScalarField next = micro_step(p, u, 0.3);
  CHECK(field_diff_max(next, u) < 1e-12);
}

TEST_CASE("1d steady profile is linear between the Dirichlet values") {
  const StructuredGrid grid = make_grid(64, 1, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::none(), 0.0, 1.0);
  p.dt = 1e3;
  p.t_end = 1e5;
  p.solver.rel_tolerance = 1e-13;
  p.solver.abs_tolerance = 1e-16;
  const TransientResult res = run_to_steady_state(p, 1e-13);
  CHECK(res.steady);
  for (int i = 0; i < grid.nx; ++i) {
    const double expect = (grid.xc(i) + 1.0) / 2.0;
    CHECK(std::fabs(res.final_field(i, 0) - expect) <= 1e-10);
  }
}

TEST_CASE("imex step matches an independent dense implementation") {
  const StructuredGrid grid = make_grid(8, 8, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::logistic(2.0, 1.0, 10.0), 0.1, 0.8);
  p.solver.rel_tolerance = 1e-14;
  p.solver.abs_tolerance = 1e-18;
  ScalarField u(grid);
  oracles::Rng rng(5);
  for (auto& v : u.values) v = 0.2 + 0.6 * rng.uniform();
  const double dt = 0.05;
  const ScalarField mine = micro_step(p, u, dt);
  const auto ref = dense_imex_step(grid, 1.0, 0.1, p.drift, 0.1, 0.8, u.values, dt);
  for (int id = 0; id < grid.cells(); ++id) CHECK(std::fabs(mine.values[id] - ref[id]) < 1e-12);
}

TEST_CASE("reference scenario reaches a steady state with positive left outflux") {
  MicroProblem p = reference_micro(64, 40, true, 2.0);
  const TransientResult res = run_to_steady_state(p, 1e-10);
  CHECK(res.steady);
  CHECK(res.flux_left.back() > 0.0);
  // mass flows right to left: influx on the right edge
  CHECK(res.flux_right.back() < 0.0);
}

TEST_CASE("drift-free steady outflux matches the analytic value") {
  MicroProblem p = reference_micro(64, 8, false, 0.0);
  p.dt = 1e3;
  p.t_end = 1e6;
  p.solver.rel_tolerance = 1e-13;
  p.solver.abs_tolerance = 1e-20;
  const TransientResult res = run_to_steady_state(p, 1e-14);
  CHECK(res.steady);
  // D1 (ur-ul)/2 * (2h/l)
  const double expect = 1.0 * (5.8e-5 - 0.0) / 2.0 * 0.8;
  CHECK(std::fabs(res.flux_left.back() - expect) <= 1e-8);
  CHECK(std::fabs(res.flux_left.back() + res.flux_right.back()) <= 1e-12);
}

TEST_CASE("obstacles can only reduce the steady through-flux") {
  MicroProblem clear = reference_micro(48, 40, false, 0.0);
  MicroProblem blocked = reference_micro(48, 40, true, 0.0);
  clear.dt = blocked.dt = 1e3;
  clear.t_end = blocked.t_end = 1e6;
  const double f_clear = run_to_steady_state(clear, 1e-12).flux_left.back();
  const double f_blocked = run_to_steady_state(blocked, 1e-12).flux_left.back();
  CHECK(f_blocked <= f_clear + 1e-12);
  CHECK(f_blocked > 0.0);
}

TEST_CASE("per-step mass balance closes to solver tolerance") {
  const StructuredGrid grid = make_grid(24, 10, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::logistic(2.0, 1.0, 10.0), 0.0, 1.0);
  p.source = ScalarField(grid, 0.3);
  p.dt = 0.05;
  p.t_end = 1.0;
  const TransientResult res = run_to_steady_state(p, 1e-14);
  REQUIRE(!res.mass_residual.empty());
  for (double r : res.mass_residual) CHECK(std::fabs(r) <= 1e-8);
}

TEST_CASE("maximum principle holds for drift-free source-free runs") {
  const StructuredGrid grid = make_grid(20, 12, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::none(), 0.2, 0.9);
  ScalarField v(grid);
  oracles::Rng rng(31);
  for (auto& x : v.values) x = 0.2 + 0.7 * rng.uniform();
  p.initial = v;
  p.dt = 0.1;
  p.t_end = 20.0;
  const double lo = std::min({0.2, 0.9, field_min(v)});
  const double hi = std::max({0.2, 0.9, field_max(v)});
  bool ok = true;
  const StepObserver check = [&](double, const ScalarField&, const ScalarField& u,
                                 const StepOutcome&) {
    if (field_min(u) < lo - 1e-12 || field_max(u) > hi + 1e-12) ok = false;
  };
  run_to_steady_state(p, 1e-12, check);
  CHECK(ok);
}

TEST_CASE("imex steps keep logistic data inside [0,1]") {
  const StructuredGrid grid = make_grid(16, 8, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::logistic(6.0, 1.0, 10.0), 0.0, 1.0);
  ScalarField v(grid);
  oracles::Rng rng(77);
  for (auto& x : v.values) x = rng.uniform();
  p.initial = v;
  p.dt = 10.0;  // capped by the CFL rule inside the march
  p.t_end = 5.0;
  bool ok = true;
  const StepObserver check = [&](double, const ScalarField&, const ScalarField& u,
                                 const StepOutcome&) {
    if (field_min(u) < -1e-12 || field_max(u) > 1.0 + 1e-12) ok = false;
  };
  run_to_steady_state(p, 1e-13, check);
  CHECK(ok);
}

TEST_CASE("steady fields at h and h/2 stay first-order consistent") {
  // coarse-vs-fine comparison against the finest run
  auto steady = [&](int nx, int ny) {
    MicroProblem p = reference_micro(nx, ny, false, 2.0);
    p.dt = 0.2;
    return run_to_steady_state(p, 1e-12).final_field;
  };
  const ScalarField f1 = steady(16, 8), f2 = steady(32, 16), f4 = steady(64, 32);
  auto restrict_err = [&](const ScalarField& coarse, const ScalarField& fine) {
    // compare coarse cells against the average of the 2x2 fine block
    double err2 = 0.0;
    for (int j = 0; j < coarse.grid.ny; ++j)
      for (int i = 0; i < coarse.grid.nx; ++i) {
        const double avg = 0.25 * (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j) +
                                   fine(2 * i, 2 * j + 1) + fine(2 * i + 1, 2 * j + 1));
        const double d = coarse(i, j) - avg;
        err2 += d * d * coarse.grid.cell_area();
      }
    return std::sqrt(err2);
  };
  const double e12 = restrict_err(f1, f2);
  const double e24 = restrict_err(f2, f4);
  CHECK(e24 < e12);  // successive halvings shrink the gap
}

TEST_CASE("cfl violations are rejected") {
  const StructuredGrid grid = make_grid(16, 4, -1.0, 1.0, 0.0, 0.8);
  MicroProblem p = MicroProblem::basic(grid, Tensor2::diagonal(1.0, 0.1),
                                       DriftPolynomial::logistic(10.0, 1.0, 1.0), 0.0, 1.0);
  const ScalarField u(grid, 0.5);
  CHECK_THROWS_AS(micro_step(p, u, 100.0), std::invalid_argument);
}

TEST_CASE("horizon exhaustion returns a flagged partial result") {
  MicroProblem p = reference_micro(32, 8, false, 2.0);
  p.t_end = 0.3;
  p.dt = 0.1;
  const TransientResult res = run_to_steady_state(p, 1e-14);
  CHECK(!res.steady);
  CHECK(res.final_time == doctest::Approx(0.3));
  CHECK(res.steps >= 3);
}
