#ifndef MEMFLUX_MACRO_MEMBRANE_HPP
#define MEMFLUX_MACRO_MEMBRANE_HPP

#include <vector>

#include "memflux/geometry.hpp"
#include "memflux/micro_solver.hpp"

namespace memflux {

/// Finite-thickness upscaled model: one strip grid carrying the bulk
/// tensor outside the membrane and the effective tensor inside it.
/// Continuity of concentration holds through the single-valued
/// unknown; flux continuity through the shared finite-volume face
/// fluxes with harmonic interface averaging.
struct MacroProblem {
  DimensionlessGeometry geom;
  StructuredGrid grid;
  Tensor2 bulk;            // D in the outer regions
  Tensor2 membrane_star;   // effective tensor in the membrane
  DriftPolynomial drift;
  ScalarField source_bar;  // averaged source; empty = 0
  double u_left = 0.0, u_right = 0.0;
  ScalarField initial;     // empty = 0
  double t_end = 100.0;
  double dt = 0.1;
  SolverConfig solver;
  std::vector<double> snapshot_times;
};

struct MacroResult {
  TransientResult transient;
  /// Shared-face total flux through the two membrane interfaces,
  /// positive rightward, one entry per step.
  std::vector<double> iface_flux_left;
  std::vector<double> iface_flux_right;
};

/// Piecewise tensor field: bulk outside [-w/l, w/l], effective inside.
TensorField macro_tensor(const DimensionlessGeometry& geom, const StructuredGrid& grid,
                         const Tensor2& bulk, const Tensor2& star);

/// Assembled diffusion operator of the macro system (validation +
/// direct access for tests); run_macro drives the full IMEX march.
SparseOperator assemble_macro(const MacroProblem& problem);

MacroResult run_macro(const MacroProblem& problem, double steady_tol);

/// Equivalent fully-resolved problem view (no obstacles) for reuse of
/// the transient engine.
MicroProblem macro_as_micro(const MacroProblem& problem);

}  // namespace memflux

#endif
