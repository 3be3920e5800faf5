#ifndef MEMFLUX_CELL_PROBLEM_HPP
#define MEMFLUX_CELL_PROBLEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "memflux/geometry.hpp"
#include "memflux/grid.hpp"
#include "memflux/linear_solver.hpp"

namespace memflux {

/// Cell problem posed on the normalized unit cell [0,1]^2: the
/// membrane periodicity cell is rescaled so the regularization delta
/// carries the geometry.  The cell functions solve
///
///   d/dY1 (delta D11 dw/dY1) + d/dY2 (D22 dw/dY2) = rhs_j
///
/// with rhs_1 = -s d(D11)/dY1 (s = sqrt(delta) unless overridden) and
/// rhs_2 = -d(D22)/dY2, periodic in Y2, zero-flux on the vertical
/// sides and on obstacle boundaries, anchored to zero mean over the
/// pore space.
struct CellProblemSpec {
  StructuredGrid grid;    // unit cell grid
  TensorField tensor;     // D(Y1,Y2); zero-extended onto the mask internally
  CellMask mask;
  double delta = 0.08;
  /// Scaling of the w1 forcing; unset means sqrt(delta) as derived.
  std::optional<double> w1_rhs_scale;
  enum class AverageMode { zero_extension, pore_average };
  AverageMode average = AverageMode::zero_extension;
  SolverConfig solver;

  static CellProblemSpec from_constant(int n, const Tensor2& d,
                                       const std::optional<MicrostructureSpec>& micro,
                                       double delta);
};

struct CellSolution {
  ScalarField w1, w2;
  Tensor2 effective;         // cell average of D (I + gradient correction)
  Tensor2 tortuosity;        // Dref^{-1} * effective, Dref = pore mean of D
  double residual_w1 = 0.0;  // final linear residuals
  double residual_w2 = 0.0;
  double mean_w1 = 0.0;      // anchoring defects, ~0
  double mean_w2 = 0.0;
};

/// Unit-cell obstacle mask for a centered microstructure; empty
/// optional yields an all-active mask.
CellMask unit_cell_obstacle_mask(const StructuredGrid& grid,
                                 const std::optional<MicrostructureSpec>& micro);

/// Solves both regularized cell functions.  Throws SolverError when a
/// blocked cell decouples the operator (disconnected pore space) or
/// the solver fails.
CellSolution solve_cell_functions(const CellProblemSpec& spec);

/// Effective transport tensor from solved cell functions: gradient
/// terms are face-flux averages (exact for layered coefficients),
/// plain terms are cell averages of the zero-extended tensor; in
/// pore-average mode sums are normalized by the pore measure instead
/// of the full cell.
Tensor2 effective_tensor(const CellSolution& sol, const CellProblemSpec& spec);

struct SweepEntry {
  double value = 0.0;        // delta or eta
  bool ok = false;
  std::string error;
  Tensor2 effective;
  double residual_w1 = 0.0, residual_w2 = 0.0;
};

/// One cell solve per delta on the shared grid; individual failures
/// are recorded and the sweep continues.  Deltas must be positive and
/// ascending.
std::vector<SweepEntry> sweep_delta(const CellProblemSpec& spec,
                                    const std::vector<double>& deltas);

/// Geometrically similar cells: one solve per eta with delta = eta
/// (eta in units of the strip length).
std::vector<SweepEntry> sweep_eta(const CellProblemSpec& spec, const std::vector<double>& etas);

}  // namespace memflux

#endif
