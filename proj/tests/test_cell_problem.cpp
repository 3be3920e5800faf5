#include <doctest.h>

#include <cmath>

#include "memflux/cell_problem.hpp"
#include "memflux/errors.hpp"

using namespace memflux;

namespace {

/// Two-layer D22 (1 below the midline, 2 above), constant D11.
CellProblemSpec layered_spec(int n, double delta) {
  CellProblemSpec spec = CellProblemSpec::from_constant(n, Tensor2::identity(), std::nullopt, delta);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      spec.tensor.d22[spec.grid.index(i, j)] = spec.grid.yc(j) < 0.5 ? 1.0 : 2.0;
  spec.solver.rel_tolerance = 1e-12;
  spec.solver.abs_tolerance = 1e-16;
  return spec;
}

}  // namespace

TEST_CASE("transparent cell: constant tensor, no obstacle") {
  const Tensor2 d = Tensor2::diagonal(1.0, 0.1);
  CellProblemSpec spec = CellProblemSpec::from_constant(64, d, std::nullopt, 0.08);
  const CellSolution sol = solve_cell_functions(spec);
  CHECK(field_max_abs(sol.w1) < 1e-12);
  CHECK(field_max_abs(sol.w2) < 1e-12);
  CHECK(std::fabs(sol.effective.d11 - d.d11) < 1e-12);
  CHECK(std::fabs(sol.effective.d22 - d.d22) < 1e-12);
  CHECK(std::fabs(sol.effective.d12) < 1e-14);
  CHECK(std::fabs(sol.effective.d21) < 1e-14);
  CHECK(sol.tortuosity.d11 == doctest::Approx(1.0));
  CHECK(sol.tortuosity.d22 == doctest::Approx(1.0));
}

TEST_CASE("two-layer coefficient: piecewise-linear cell function and harmonic mean") {
  const int n = 128;
  CellProblemSpec spec = layered_spec(n, 0.08);
  const CellSolution sol = solve_cell_functions(spec);

  // slopes 1/3 below, -1/3 above, measured on within-layer faces
  const int i = n / 4;
  for (int j = 0; j < n - 1; ++j) {
    const double lo = spec.grid.yc(j), hi = spec.grid.yc(j + 1);
    if (hi < 0.5) {
      const double slope = (sol.w2(i, j + 1) - sol.w2(i, j)) / spec.grid.hy;
      CHECK(slope == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    } else if (lo > 0.5) {
      const double slope = (sol.w2(i, j + 1) - sol.w2(i, j)) / spec.grid.hy;
      CHECK(slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));
    }
  }
  CHECK(std::fabs(sol.effective.d22 - 4.0 / 3.0) <= 1e-6);
  CHECK(std::fabs(sol.mean_w2) < 1e-12);
}

TEST_CASE("layered effective coefficient is independent of delta") {
  const int n = 64;
  std::vector<double> deltas;
  for (int k = 0; k < 7; ++k) deltas.push_back(1e-3 * std::pow(10.0, 3.0 * k / 6.0));
  const auto entries = sweep_delta(layered_spec(n, 1.0), deltas);
  REQUIRE(entries.size() == deltas.size());
  for (const auto& e : entries) {
    REQUIRE(e.ok);
    CHECK(std::fabs(e.effective.d22 - entries.front().effective.d22) <= 1e-8);
  }
}

TEST_CASE("d11 influence on the transport entry vanishes with delta") {
  const int n = 64;
  auto d22_star = [&](double d11, double delta) {
    CellProblemSpec spec =
        CellProblemSpec::from_constant(n, Tensor2::identity(), std::nullopt, delta);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int id = spec.grid.index(i, j);
        spec.tensor.d11[id] = d11;
        spec.tensor.d22[id] = 1.0 + 0.5 * std::sin(2.0 * 3.14159265358979 * spec.grid.yc(j)) *
                                        (0.5 + 0.5 * std::cos(3.14159265358979 * spec.grid.xc(i)));
      }
    spec.solver.rel_tolerance = 1e-12;
    return solve_cell_functions(spec).effective.d22;
  };
  double first = 0.0, prev = 1e300;
  bool have_first = false;
  for (double delta : {0.3, 0.03, 0.003}) {
    const double sensitivity = std::fabs(d22_star(10.0, delta) - d22_star(1.0, delta));
    CHECK(sensitivity < prev);
    prev = sensitivity;
    if (!have_first) {
      first = sensitivity;
      have_first = true;
    }
  }
  CHECK(prev < first / 20.0);
  CHECK(prev < 2e-4);
}

TEST_CASE("symmetric rectangular obstacle gives an antisymmetric w2") {
  CellProblemSpec spec = CellProblemSpec::from_constant(
      64, Tensor2::diagonal(1.0, 0.1), MicrostructureSpec::rectangle(0.5, 0.75), 0.08);
  spec.solver.rel_tolerance = 1e-12;
  const CellSolution sol = solve_cell_functions(spec);
  double worst = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst, std::fabs(sol.w2(i, j) + sol.w2(i, 63 - j)));
  CHECK(worst <= 1e-8);
}

TEST_CASE("an obstacle obstructs vertical transport") {
  CellProblemSpec clear =
      CellProblemSpec::from_constant(64, Tensor2::identity(), std::nullopt, 0.08);
  CellProblemSpec blocked = CellProblemSpec::from_constant(
      64, Tensor2::identity(), MicrostructureSpec::rectangle(0.5, 0.75), 0.08);
  const double open = solve_cell_functions(clear).effective.d22;
  const double obstructed = solve_cell_functions(blocked).effective.d22;
  CHECK(open == doctest::Approx(1.0));
  CHECK(obstructed < 1.0);
  CHECK(obstructed > 0.0);
}

TEST_CASE("effective coefficient sits between harmonic and arithmetic means") {
  const int n = 128;
  CellProblemSpec spec = CellProblemSpec::from_constant(n, Tensor2::identity(), std::nullopt, 0.1);
  double harm = 0.0, arith = 0.0;
  for (int j = 0; j < n; ++j) {
    const double v = 1.5 + 0.5 * std::sin(2.0 * 3.14159265358979 * spec.grid.yc(j));
    for (int i = 0; i < n; ++i) spec.tensor.d22[spec.grid.index(i, j)] = v;
    harm += 1.0 / v;
    arith += v;
  }
  harm = n / harm;
  arith /= n;
  const double star = solve_cell_functions(spec).effective.d22;
  CHECK(star >= harm - 1e-3);
  CHECK(star <= arith + 1e-3);
  CHECK(star == doctest::Approx(harm).epsilon(1e-3));  // 1d layered limit
}

TEST_CASE("sweeps are deterministic and validate their input") {
  CellProblemSpec spec = CellProblemSpec::from_constant(
      32, Tensor2::identity(), MicrostructureSpec::rectangle(0.5, 0.75), 0.08);
  const auto twice = sweep_delta(spec, {0.05, 0.05});
  REQUIRE(twice.size() == 2);
  CHECK(twice[0].effective.d22 == twice[1].effective.d22);  // bitwise
  CHECK(twice[0].effective.d11 == twice[1].effective.d11);

  CHECK_THROWS_AS(sweep_delta(spec, {}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_delta(spec, {0.1, 0.01}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_delta(spec, {-0.1, 0.01}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_eta(spec, {}), std::invalid_argument);
}

TEST_CASE("a single-eta sweep matches the direct solve") {
  CellProblemSpec spec = CellProblemSpec::from_constant(
      32, Tensor2::identity(), MicrostructureSpec::rectangle(0.5, 0.75), 0.3);
  const auto entries = sweep_eta(spec, {0.04});
  REQUIRE(entries.size() == 1);
  REQUIRE(entries[0].ok);
  CellProblemSpec direct = spec;
  direct.delta = 0.04;
  const CellSolution sol = solve_cell_functions(direct);
  CHECK(entries[0].effective.d22 == sol.effective.d22);
}

TEST_CASE("a pore-disconnecting obstacle is reported as blocked") {
  CellProblemSpec spec =
      CellProblemSpec::from_constant(16, Tensor2::identity(), std::nullopt, 0.1);
  spec.mask = CellMask::all_active(16, 16);
  for (int j = 0; j < 16; ++j) spec.mask.masked[spec.grid.index(8, j)] = 1;  // full column
  CHECK_THROWS_AS(solve_cell_functions(spec), SolverError);
}

TEST_CASE("effective tensor converges under grid refinement") {
  double prev_gap = 1e300;
  double prev = 0.0;
  bool have_prev = false;
  for (int n : {32, 64, 128}) {
    CellProblemSpec spec = CellProblemSpec::from_constant(
        n, Tensor2::diagonal(1.0, 0.1), MicrostructureSpec::rectangle(0.5, 0.75), 0.08);
    const double star = solve_cell_functions(spec).effective.d22;
    if (have_prev) {
      const double gap = std::fabs(star - prev);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    prev = star;
    have_prev = true;
  }
}

TEST_CASE("pore-average normalization exceeds the zero-extension value") {
  CellProblemSpec spec = CellProblemSpec::from_constant(
      64, Tensor2::identity(), MicrostructureSpec::rectangle(0.5, 0.75), 0.08);
  const double zero_ext = solve_cell_functions(spec).effective.d22;
  spec.average = CellProblemSpec::AverageMode::pore_average;
  const double pore = solve_cell_functions(spec).effective.d22;
  CHECK(pore > zero_ext);
}

TEST_CASE("invalid regularization is rejected") {
  CellProblemSpec spec =
      CellProblemSpec::from_constant(16, Tensor2::identity(), std::nullopt, 0.0);
  CHECK_THROWS_AS(solve_cell_functions(spec), std::invalid_argument);
}

TEST_CASE("w1 develops structure only where d11 varies horizontally") {
  CellProblemSpec spec = CellProblemSpec::from_constant(
      48, Tensor2::identity(), MicrostructureSpec::rectangle(0.5, 0.5), 0.1);
  const CellSolution sol = solve_cell_functions(spec);
  CHECK(field_max_abs(sol.w1, spec.mask) > 1e-6);
  CHECK(std::fabs(sol.mean_w1) < 1e-12);
  // residual bound scales with ||b|| through the solver's rel tolerance
  CHECK(sol.residual_w1 <= 1e-7);
  CHECK(sol.residual_w2 <= 1e-7);
}
