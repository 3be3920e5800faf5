#include "memflux/macro_membrane.hpp"

#include <cmath>
#include <stdexcept>

namespace memflux {

TensorField macro_tensor(const DimensionlessGeometry& geom, const StructuredGrid& grid,
                         const Tensor2& bulk, const Tensor2& star) {
  TensorField t(grid, bulk);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.xc(i);
      if (x > -geom.membrane_half && x < geom.membrane_half) t.set(grid.index(i, j), star);
    }
  return t;
}

MicroProblem macro_as_micro(const MacroProblem& problem) {
  if (!(problem.membrane_star.d11 > 0.0) || !(problem.membrane_star.d22 > 0.0))
    throw std::invalid_argument("macro problem: effective tensor diagonal must be positive");
  MicroProblem p;
  p.grid = problem.grid;
  p.mask = CellMask::none();
  p.tensor = macro_tensor(problem.geom, problem.grid, problem.bulk, problem.membrane_star);
  p.drift = problem.drift;
  p.source = problem.source_bar;
  p.bcs = BoundaryConditions::dirichlet_lr(problem.u_left, problem.u_right);
  p.initial = problem.initial.values.empty() ? ScalarField(problem.grid, 0.0) : problem.initial;
  p.t_end = problem.t_end;
  p.dt = problem.dt;
  p.solver = problem.solver;
  p.snapshot_times = problem.snapshot_times;
  return p;
}

SparseOperator assemble_macro(const MacroProblem& problem) {
  const MicroProblem p = macro_as_micro(problem);
  return assemble_diffusion(p.grid, p.tensor, p.mask, p.bcs);
}

MacroResult run_macro(const MacroProblem& problem, double steady_tol) {
  const MicroProblem p = macro_as_micro(problem);
  MacroResult res;
  const int face_left =
      static_cast<int>(std::lround((-problem.geom.membrane_half - p.grid.origin_x) / p.grid.hx));
  const int face_right =
      static_cast<int>(std::lround((problem.geom.membrane_half - p.grid.origin_x) / p.grid.hx));
  const StepObserver observer = [&](double, const ScalarField& prev, const ScalarField& next,
                                    const StepOutcome&) {
    res.iface_flux_left.push_back(column_total_flux(p.grid, p.tensor, p.drift, next, prev,
                                                    p.mask, p.bcs, face_left));
    res.iface_flux_right.push_back(column_total_flux(p.grid, p.tensor, p.drift, next, prev,
                                                     p.mask, p.bcs, face_right));
  };
  res.transient = run_to_steady_state(p, steady_tol, observer);
  return res;
}

}  // namespace memflux
