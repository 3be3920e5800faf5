#include <doctest.h>

#include <cmath>

#include "memflux/macro_membrane.hpp"
#include "oracles.hpp"

using namespace memflux;

namespace {

MacroProblem reference_macro(int nx, int ny, const Tensor2& bulk, const Tensor2& star,
                             const DriftPolynomial& drift, double ul, double ur) {
  MacroProblem p;
  p.geom = nondimensionalize(PhysicalGeometry{1.0, 0.4, 0.25, 0.08});
  p.grid = strip_grid(p.geom, nx, ny);
  p.bulk = bulk;
  p.membrane_star = star;
  p.drift = drift;
  p.source_bar = ScalarField(p.grid, 0.0);
  p.u_left = ul;
  p.u_right = ur;
  p.initial = ScalarField(p.grid, 0.0);
  p.t_end = 600.0;
  p.dt = 0.5;
  return p;
}

}  // namespace

TEST_CASE("transparent membrane equals the homogeneous strip solve") {
  const Tensor2 d = Tensor2::diagonal(1.0, 0.1);
  MacroProblem with_membrane = reference_macro(64, 16, d, d, DriftPolynomial::none(), 0.0, 1.0);
  with_membrane.dt = 50.0;
  const MacroResult a = run_macro(with_membrane, 1e-13);

  MicroProblem plain = macro_as_micro(with_membrane);
  plain.tensor = TensorField(plain.grid, d);  // no membrane region at all
  const TransientResult b = run_to_steady_state(plain, 1e-13);

  CHECK(a.transient.steady);
  CHECK(field_diff_max(a.transient.final_field, b.final_field) < 1e-12);
}

TEST_CASE("piecewise tensor is placed by region") {
  const Tensor2 bulk = Tensor2::diagonal(1.0, 0.1);
  Tensor2 star = Tensor2::diagonal(0.4, 0.05);
  const DimensionlessGeometry geom = nondimensionalize(PhysicalGeometry{1.0, 0.4, 0.25, 0.08});
  const StructuredGrid grid = strip_grid(geom, 32, 8);
  const TensorField t = macro_tensor(geom, grid, bulk, star);
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.xc(i);
    const double expect = (x > -0.25 && x < 0.25) ? star.d11 : bulk.d11;
    CHECK(t.d11[grid.index(i, 0)] == expect);
  }
}

TEST_CASE("three-layer steady flux matches the series-resistance formula") {
  const double d_bulk = 1.0, d_star = 0.3, ur = 1.0;
  MacroProblem p = reference_macro(64, 4, Tensor2::diagonal(d_bulk, 0.1),
                                   Tensor2::diagonal(d_star, 0.05), DriftPolynomial::none(),
                                   0.0, ur);
  p.dt = 100.0;
  p.solver.rel_tolerance = 1e-13;
  p.solver.abs_tolerance = 1e-20;
  const MacroResult res = run_macro(p, 1e-13);
  REQUIRE(res.transient.steady);
  const double resistance = 0.75 / d_bulk + 0.5 / d_star + 0.75 / d_bulk;
  const double expect_per_height = (ur - 0.0) / resistance;
  const double height = 0.8;
  CHECK(std::fabs(res.transient.flux_left.back() - expect_per_height * height) <=
        1e-8 * expect_per_height * height);
}

TEST_CASE("interface fluxes equal the boundary flux at steady state") {
  MacroProblem p = reference_macro(64, 8, Tensor2::diagonal(1.0, 0.1),
                                   Tensor2::diagonal(0.3, 0.05), DriftPolynomial::none(), 0.0,
                                   1.0);
  p.dt = 100.0;
  const MacroResult res = run_macro(p, 1e-13);
  REQUIRE(res.transient.steady);
  // mass flows right to left; the rightward column flux is minus the
  // left outflux, and all columns agree at steady state
  const double j_left = res.iface_flux_left.back();
  const double j_right = res.iface_flux_right.back();
  CHECK(j_left == doctest::Approx(j_right).epsilon(1e-7));
  CHECK(j_left == doctest::Approx(-res.transient.flux_left.back()).epsilon(1e-7));
}

TEST_CASE("zero data stays identically zero") {
  MacroProblem p = reference_macro(32, 8, Tensor2::diagonal(1.0, 0.1),
                                   Tensor2::diagonal(0.5, 0.05),
                                   DriftPolynomial::logistic(2.0, 1.0, 10.0), 0.0, 0.0);
  p.t_end = 2.0;
  const MacroResult res = run_macro(p, 1e-15);
  CHECK(field_max_abs(res.transient.final_field) == 0.0);
}

TEST_CASE("increased drift shrinks the steady outflux") {
  auto outflux = [&](double b, const Tensor2& star) {
    MacroProblem p = reference_macro(64, 16, Tensor2::diagonal(1.0, 0.1), star,
                                     DriftPolynomial::logistic(b, 1.0, 10.0), 0.0, 5.8e-5);
    p.dt = 0.5;
    const MacroResult r = run_macro(p, 1e-12);
    REQUIRE(r.transient.steady);
    return r.transient.flux_left.back();
  };
  const Tensor2 diag_star = Tensor2::diagonal(0.6, 0.04);
  Tensor2 full_star = diag_star;
  full_star.d12 = -0.05;
  full_star.d21 = 0.05;
  const double moderate = outflux(2.0, diag_star);
  const double barrier = outflux(54.0, full_star);
  CHECK(moderate > 0.0);
  CHECK(barrier > 0.0);
  CHECK(barrier < moderate);
}

TEST_CASE("steady solution obeys the maximum principle for spd tensors") {
  Tensor2 star = Tensor2::diagonal(0.5, 0.08);
  star.d12 = 0.03;
  star.d21 = 0.03;
  MacroProblem p = reference_macro(48, 12, Tensor2::diagonal(1.0, 0.1), star,
                                   DriftPolynomial::none(), 0.2, 0.9);
  p.dt = 50.0;
  const MacroResult res = run_macro(p, 1e-13);
  REQUIRE(res.transient.steady);
  CHECK(field_min(res.transient.final_field) >= 0.2 - 1e-10);
  CHECK(field_max(res.transient.final_field) <= 0.9 + 1e-10);
}

TEST_CASE("macro rejects invalid effective tensors") {
  MacroProblem p = reference_macro(32, 8, Tensor2::diagonal(1.0, 0.1),
                                   Tensor2::diagonal(-1.0, 0.1), DriftPolynomial::none(), 0.0,
                                   1.0);
  CHECK_THROWS_AS(assemble_macro(p), std::invalid_argument);
}
