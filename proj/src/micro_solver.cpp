#include "memflux/micro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memflux/errors.hpp"

namespace memflux {

MicroProblem MicroProblem::basic(const StructuredGrid& grid, const Tensor2& d,
                                 const DriftPolynomial& g, double u_left, double u_right) {
  MicroProblem p;
  p.grid = grid;
  p.mask = CellMask::none();
  p.tensor = TensorField(grid, d);
  p.drift = g;
  p.source = ScalarField(grid, 0.0);
  p.bcs = BoundaryConditions::dirichlet_lr(u_left, u_right);
  p.initial = ScalarField(grid, 0.0);
  return p;
}

SparseOperator add_to_diagonal(const SparseOperator& A, const std::vector<double>& d) {
  SparseOperator B;
  B.n = A.n;
  B.row_ptr.assign(static_cast<std::size_t>(A.n) + 1, 0);
  B.col_idx.reserve(A.col_idx.size() + static_cast<std::size_t>(A.n));
  B.vals.reserve(A.vals.size() + static_cast<std::size_t>(A.n));
  for (int r = 0; r < A.n; ++r) {
    bool placed = (d[r] == 0.0);
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      const int c = A.col_idx[k];
      if (!placed && c > r) {
        B.col_idx.push_back(r);
        B.vals.push_back(d[r]);
        placed = true;
      }
      double v = A.vals[k];
      if (!placed && c == r) {
        v += d[r];
        placed = true;
      }
      B.col_idx.push_back(c);
      B.vals.push_back(v);
    }
    if (!placed) {
      B.col_idx.push_back(r);
      B.vals.push_back(d[r]);
    }
    B.row_ptr[r + 1] = static_cast<int>(B.col_idx.size());
  }
  return B;
}

TransientSolver::TransientSolver(const StructuredGrid& grid, const TensorField& tensor,
                                 const CellMask& mask, const BoundaryConditions& bcs,
                                 const DriftPolynomial& drift, const ScalarField& source,
                                 const SolverConfig& solver)
    : grid_(grid),
      tensor_(tensor),
      mask_(mask),
      bcs_(bcs),
      drift_(drift),
      source_(source),
      solver_(solver) {
  diffusion_ = assemble_diffusion(grid_, tensor_, mask_, bcs_);
  bc_rhs_.assign(static_cast<std::size_t>(grid_.cells()), 0.0);
  apply_bc(grid_, tensor_, mask_, bcs_, bc_rhs_);
  symmetric_ = tensor_.is_diagonal();
}

void TransientSolver::update_bc_values(const BoundaryConditions& bcs) {
  auto same_structure = [](const EdgeBc& a, const EdgeBc& b) {
    return a.kind == b.kind && a.coupling_coeff == b.coupling_coeff;
  };
  if (!same_structure(bcs_.left, bcs.left) || !same_structure(bcs_.right, bcs.right) ||
      !same_structure(bcs_.bottom, bcs.bottom) || !same_structure(bcs_.top, bcs.top))
    throw std::invalid_argument(
        "TransientSolver::update_bc_values: edge kinds/coefficients must not change");
  bcs_ = bcs;
  std::fill(bc_rhs_.begin(), bc_rhs_.end(), 0.0);
  apply_bc(grid_, tensor_, mask_, bcs_, bc_rhs_);
}

double TransientSolver::cfl_dt(const ScalarField& u) const {
  double lo = field_min(u, mask_), hi = field_max(u, mask_);
  auto widen = [&](const EdgeBc& e) {
    if (e.kind == BcKind::dirichlet) {
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
    }
  };
  widen(bcs_.left);
  widen(bcs_.right);
  widen(bcs_.bottom);
  widen(bcs_.top);
  return drift_cfl_dt(grid_, tensor_, drift_, lo, hi);
}

StepOutcome TransientSolver::step(ScalarField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("TransientSolver::step: dt must be positive");
  const double cfl = cfl_dt(u);
  if (dt > cfl * (1.0 + 1e-12))
    throw std::invalid_argument("TransientSolver::step: dt " + std::to_string(dt) +
                                " violates the drift CFL bound " + std::to_string(cfl));

  const int n = grid_.cells();
  if (dt != cached_dt_) {
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    for (int id = 0; id < n; ++id)
      if (!mask_.is_masked(id)) diag[id] = 1.0 / dt;
    step_matrix_ = add_to_diagonal(diffusion_, diag);
    cached_dt_ = dt;
  }

  const double mass_before = field_mass(u, mask_);
  const ScalarField drift_div = drift_divergence(grid_, tensor_, drift_, u, mask_, bcs_);
  std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
  const bool has_source = !source_.values.empty();
  for (int id = 0; id < n; ++id) {
    if (mask_.is_masked(id)) continue;  // identity rows keep masked cells at zero
    rhs[id] = u.values[id] / dt + drift_div.values[id] + bc_rhs_[id];
    if (has_source) rhs[id] += source_.values[id];
  }

  std::vector<double> next;
  if (symmetric_)
    next = solve_spd(step_matrix_, rhs, solver_, nullptr, nullptr, u.values);
  else
    next = solve_general(step_matrix_, rhs, solver_, nullptr, u.values);

  ScalarField u_new = u;
  u_new.values = std::move(next);
  for (int id = 0; id < n; ++id)
    if (mask_.is_masked(id)) u_new.values[id] = 0.0;

  StepOutcome out;
  out.fluxes = boundary_outflow(grid_, tensor_, drift_, u_new, u, mask_, bcs_);
  out.mass = field_mass(u_new, mask_);
  double source_mass = 0.0;
  if (has_source) source_mass = field_mass(source_, mask_);
  out.mass_residual =
      out.mass - mass_before - dt * (-out.fluxes.net_outflow() + source_mass);
  u = std::move(u_new);
  return out;
}

ScalarField micro_step(const MicroProblem& problem, const ScalarField& u_n, double dt,
                       StepOutcome* outcome) {
  TransientSolver solver(problem.grid, problem.tensor, problem.mask, problem.bcs, problem.drift,
                         problem.source, problem.solver);
  ScalarField u = u_n;
  StepOutcome out = solver.step(u, dt);
  if (outcome) *outcome = out;
  return u;
}

TransientResult run_to_steady_state(const MicroProblem& problem, double tol,
                                    const StepObserver& observer) {
  if (!(tol > 0.0))
    throw std::invalid_argument("run_to_steady_state: tolerance must be positive");
  TransientSolver solver(problem.grid, problem.tensor, problem.mask, problem.bcs, problem.drift,
                         problem.source, problem.solver);
  TransientResult res;
  ScalarField u = problem.initial;
  if (u.values.empty()) u = ScalarField(problem.grid, 0.0);
  for (int id = 0; id < problem.grid.cells(); ++id)
    if (problem.mask.is_masked(id)) u.values[id] = 0.0;

  res.snapshots.emplace_back(0.0, u);
  std::vector<double> pending = problem.snapshot_times;
  std::sort(pending.begin(), pending.end());

  double t = 0.0;
  ScalarField prev = u;
  while (t < problem.t_end) {
    double dt = std::min(problem.dt, problem.t_end - t);
    const double cfl = solver.cfl_dt(u);
    if (std::isfinite(cfl)) dt = std::min(dt, 0.9 * cfl);
    prev = u;
    const StepOutcome out = solver.step(u, dt);
    t += dt;
    ++res.steps;
    res.times.push_back(t);
    res.mass.push_back(out.mass);
    res.flux_left.push_back(out.fluxes.left);
    res.flux_right.push_back(out.fluxes.right);
    res.mass_residual.push_back(out.mass_residual);
    if (observer) observer(t, prev, u, out);
    while (!pending.empty() && t >= pending.front() - 1e-12) {
      res.snapshots.emplace_back(t, u);
      pending.erase(pending.begin());
    }
    const double rate = field_diff_max(u, prev, problem.mask) / dt;
    if (rate <= tol) {
      res.steady = true;
      break;
    }
  }
  res.final_time = t;
  res.final_field = u;
  if (res.snapshots.empty() || res.snapshots.back().first != t) res.snapshots.emplace_back(t, u);
  return res;
}

}  // namespace memflux
