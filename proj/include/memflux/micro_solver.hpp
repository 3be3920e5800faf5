#ifndef MEMFLUX_MICRO_SOLVER_HPP
#define MEMFLUX_MICRO_SOLVER_HPP

#include <functional>
#include <utility>
#include <vector>

#include "memflux/discretization.hpp"
#include "memflux/grid.hpp"
#include "memflux/linear_solver.hpp"

namespace memflux {

/// Fully resolved dimensionless problem on the (possibly obstacle
/// masked) strip: du/dT + div J = F with J = -D(grad u + G(u)).
struct MicroProblem {
  StructuredGrid grid;
  CellMask mask;              // empty = no obstacles
  TensorField tensor;         // dimensionless D
  DriftPolynomial drift;      // dimensionless g
  ScalarField source;         // F; empty values = zero source
  BoundaryConditions bcs;
  ScalarField initial;        // V
  double t_end = 100.0;       // horizon
  double dt = 0.1;            // base step, capped each step by the drift CFL
  SolverConfig solver;
  std::vector<double> snapshot_times;  // extra snapshots besides first/last

  static MicroProblem basic(const StructuredGrid& grid, const Tensor2& d,
                            const DriftPolynomial& g, double u_left, double u_right);
};

struct TransientResult {
  std::vector<std::pair<double, ScalarField>> snapshots;
  std::vector<double> times;          // per accepted step
  std::vector<double> mass;
  std::vector<double> flux_left;      // net outward flux through the left edge
  std::vector<double> flux_right;     // net outward flux through the right edge
  std::vector<double> mass_residual;  // per-step balance defect (solver tolerance scale)
  ScalarField final_field;
  double final_time = 0.0;
  int steps = 0;
  bool steady = false;
};

struct StepOutcome {
  BoundaryFluxes fluxes;
  double mass_residual = 0.0;
  double mass = 0.0;
};

/// IMEX stepping engine: implicit diffusion, explicit upwinded drift
/// and source.  The diffusion operator is assembled once; the step
/// matrix is refreshed only when dt changes.
class TransientSolver {
public:
  TransientSolver(const StructuredGrid& grid, const TensorField& tensor, const CellMask& mask,
                  const BoundaryConditions& bcs, const DriftPolynomial& drift,
                  const ScalarField& source, const SolverConfig& solver);

  /// Advances u in place by one IMEX step.  Throws
  /// std::invalid_argument when dt violates the drift CFL bound and
  /// SolverError when the linear solve fails.
  StepOutcome step(ScalarField& u, double dt);

  /// Largest drift-stable dt for the current field (infinite without
  /// drift).
  double cfl_dt(const ScalarField& u) const;

  const SparseOperator& diffusion_operator() const { return diffusion_; }
  const BoundaryConditions& bcs() const { return bcs_; }

  /// Refreshes Dirichlet/interface data without reassembly; the edge
  /// kinds and coupling coefficients must match the construction-time
  /// conditions (those live in the matrix).
  void update_bc_values(const BoundaryConditions& bcs);

private:
  StructuredGrid grid_;
  TensorField tensor_;
  CellMask mask_;
  BoundaryConditions bcs_;
  DriftPolynomial drift_;
  ScalarField source_;
  SolverConfig solver_;
  SparseOperator diffusion_;
  std::vector<double> bc_rhs_;
  double cached_dt_ = -1.0;
  SparseOperator step_matrix_;
  bool symmetric_ = true;
};

/// One IMEX step of the micro problem (spec operation).
ScalarField micro_step(const MicroProblem& problem, const ScalarField& u_n, double dt,
                       StepOutcome* outcome = nullptr);

/// Called after each accepted step with the time, the pre/post fields
/// and the step outcome.
using StepObserver =
    std::function<void(double, const ScalarField&, const ScalarField&, const StepOutcome&)>;

/// Marches until ||u_{n+1}-u_n||_inf / dt <= tol; when the horizon is
/// exhausted first the result is flagged non-steady and returned
/// partially.
TransientResult run_to_steady_state(const MicroProblem& problem, double tol,
                                    const StepObserver& observer = {});

/// Adds d[i] to the diagonal of A (inserting missing diagonal entries).
SparseOperator add_to_diagonal(const SparseOperator& A, const std::vector<double>& d);

}  // namespace memflux

#endif
