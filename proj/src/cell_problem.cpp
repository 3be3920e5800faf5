#include "memflux/cell_problem.hpp"

#include <cmath>
#include <future>
#include <queue>
#include <stdexcept>
#include <thread>

#include "memflux/discretization.hpp"
#include "memflux/errors.hpp"

namespace memflux {

namespace {

double harmonic(double a, double b) {
  return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
}

BoundaryConditions cell_bcs() {
  BoundaryConditions bcs;
  bcs.left = EdgeBc::zero_flux();
  bcs.right = EdgeBc::zero_flux();
  bcs.bottom = EdgeBc::periodic();
  bcs.top = EdgeBc::periodic();
  return bcs;
}

/// Pore space must be one connected component (faces with positive
/// transmissibility, periodic wrap in Y2); otherwise the cell operator
/// decouples and the zero-mean anchoring is ill-posed.
void check_pore_connectivity(const StructuredGrid& grid, const CellMask& mask) {
  const int n = grid.cells();
  int first_active = -1;
  int active_count = 0;
  for (int id = 0; id < n; ++id) {
    if (!mask.is_masked(id)) {
      ++active_count;
      if (first_active < 0) first_active = id;
    }
  }
  if (active_count == 0) throw SolverError("cell problem: obstacle fills the entire cell");
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> frontier;
  frontier.push(first_active);
  seen[first_active] = 1;
  int reached = 0;
  while (!frontier.empty()) {
    const int id = frontier.front();
    frontier.pop();
    ++reached;
    const int i = id % grid.nx, j = id / grid.nx;
    auto visit = [&](int ii, int jj) {
      if (ii < 0 || ii >= grid.nx) return;  // no wrap in Y1
      if (jj < 0) jj += grid.ny;            // periodic in Y2
      if (jj >= grid.ny) jj -= grid.ny;
      const int nid = grid.index(ii, jj);
      if (seen[nid] || mask.is_masked(nid)) return;
      seen[nid] = 1;
      frontier.push(nid);
    };
    visit(i - 1, j);
    visit(i + 1, j);
    visit(i, j - 1);
    visit(i, j + 1);
  }
  if (reached != active_count)
    throw SolverError(
        "cell problem: blocked cell, the obstacle disconnects the pore space and the "
        "operator decouples (" +
        std::to_string(reached) + " of " + std::to_string(active_count) +
        " pore cells reachable)");
}

struct FaceSums {
  // Face-flux averages over the Y2 faces (wrap included).
  double d22_grad_w1 = 0.0;  // sum of D22_f * dw1/dY2
  double d22_flux_w2 = 0.0;  // sum of D22_f * (dw2/dY2 + 1)
  double d12_grad_w1 = 0.0;
  double d12_grad_w2 = 0.0;
  long faces = 0;
  long active_faces = 0;
};

FaceSums y_face_sums(const StructuredGrid& grid, const TensorField& tensor,
                     const CellMask& mask, const ScalarField& w1, const ScalarField& w2) {
  FaceSums s;
  for (int j = 0; j < grid.ny; ++j) {
    const int jn = (j + 1) % grid.ny;
    for (int i = 0; i < grid.nx; ++i) {
      const int ids = grid.index(i, j), idn = grid.index(i, jn);
      ++s.faces;
      const bool active = !mask.is_masked(ids) && !mask.is_masked(idn);
      if (!active) continue;
      ++s.active_faces;
      const double hf = harmonic(tensor.d22[ids], tensor.d22[idn]);
      const double af12 = 0.5 * (tensor.d12[ids] + tensor.d12[idn]);
      const double g1 = (w1.values[idn] - w1.values[ids]) / grid.hy;
      const double g2 = (w2.values[idn] - w2.values[ids]) / grid.hy;
      s.d22_grad_w1 += hf * g1;
      s.d22_flux_w2 += hf * (g2 + 1.0);
      s.d12_grad_w1 += af12 * g1;
      s.d12_grad_w2 += af12 * g2;
    }
  }
  return s;
}

/// Constant-flux divergence feeding the cell-function right side:
/// A w_j = +div(phi_j) with A = -div(D' grad .), where phi_j is the
/// coordinate flux D' S^{-1} e_j of the rescaled gradient
/// (sqrt(delta) d/dY1, d/dY2).  The x-component rides on the x-faces
/// with one-sided continuation onto the walls (so constant
/// coefficients force identically zero cell functions) and the
/// y-component wraps periodically; obstacle faces carry nothing.
std::vector<double> cell_rhs(const StructuredGrid& grid, const TensorField& tensor,
                             const CellMask& mask, double x_scale,
                             const std::vector<double>& dxx, const std::vector<double>& dyy,
                             bool x_harmonic) {
  std::vector<double> b(static_cast<std::size_t>(grid.cells()), 0.0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const int idw = grid.index(i, j), ide = grid.index(i + 1, j);
      if (mask.is_masked(idw) || mask.is_masked(ide)) continue;
      const double face =
          x_harmonic ? harmonic(dxx[idw], dxx[ide]) : 0.5 * (dxx[idw] + dxx[ide]);
      const double f = x_scale * face;
      b[idw] += f / grid.hx;  // east face of the west cell
      b[ide] -= f / grid.hx;
    }
    const int first = grid.index(0, j), last = grid.index(grid.nx - 1, j);
    if (!mask.is_masked(first)) b[first] -= x_scale * dxx[first] / grid.hx;
    if (!mask.is_masked(last)) b[last] += x_scale * dxx[last] / grid.hx;
  }
  for (int j = 0; j < grid.ny; ++j) {
    const int jn = (j + 1) % grid.ny;
    for (int i = 0; i < grid.nx; ++i) {
      const int ids = grid.index(i, j), idn = grid.index(i, jn);
      if (mask.is_masked(ids) || mask.is_masked(idn)) continue;
      const double f = harmonic(dyy[ids], dyy[idn]);
      b[ids] += f / grid.hy;  // north face of the south cell
      b[idn] -= f / grid.hy;
    }
  }
  return b;
}

/// Runs tasks over [0, count) in index order within bounded batches;
/// results land in caller-owned slots so the output order is
/// deterministic.
template <class Fn>
void run_indexed(int count, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  int next = 0;
  while (next < count) {
    const int batch = std::min<int>(static_cast<int>(hw), count - next);
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(batch));
    for (int k = 0; k < batch; ++k)
      futures.push_back(std::async(std::launch::async, fn, next + k));
    for (auto& f : futures) f.get();
    next += batch;
  }
}

}  // namespace

CellProblemSpec CellProblemSpec::from_constant(int n, const Tensor2& d,
                                               const std::optional<MicrostructureSpec>& micro,
                                               double delta) {
  CellProblemSpec spec;
  spec.grid = make_grid(n, n, 0.0, 1.0, 0.0, 1.0);
  spec.tensor = TensorField(spec.grid, d);
  spec.mask = unit_cell_obstacle_mask(spec.grid, micro);
  spec.delta = delta;
  return spec;
}

CellMask unit_cell_obstacle_mask(const StructuredGrid& grid,
                                 const std::optional<MicrostructureSpec>& micro) {
  DimensionlessGeometry geom;
  geom.domain_y1 = grid.height();
  geom.membrane_half = 0.5 * grid.width();
  geom.epsilon = grid.height();
  Rect cell{grid.origin_x, grid.origin_x + grid.width(), grid.origin_y,
            grid.origin_y + grid.height()};
  geom.cells = {cell};
  return rasterize_obstacles(geom, micro, grid);
}

CellSolution solve_cell_functions(const CellProblemSpec& spec) {
  if (!(spec.delta > 0.0))
    throw std::invalid_argument("cell problem: delta must be positive");
  validate_tensor(spec.tensor, spec.mask);
  check_pore_connectivity(spec.grid, spec.mask);

  TensorField d = spec.tensor;
  d.zero_masked(spec.mask);

  // Operator tensor diag(delta*D11, D22); off-diagonal entries of D do
  // not enter the regularized cell operator.
  TensorField op_tensor(spec.grid, Tensor2::identity());
  for (int id = 0; id < spec.grid.cells(); ++id) {
    op_tensor.d11[id] = spec.delta * d.d11[id];
    op_tensor.d12[id] = 0.0;
    op_tensor.d21[id] = 0.0;
    op_tensor.d22[id] = d.d22[id];
  }
  const BoundaryConditions bcs = cell_bcs();
  const SparseOperator A = assemble_diffusion(spec.grid, op_tensor, spec.mask, bcs);

  const double scale1 = spec.w1_rhs_scale.value_or(std::sqrt(spec.delta));
  const std::vector<double> b1 = cell_rhs_w1(spec.grid, d, spec.mask, scale1);
  const std::vector<double> b2 = cell_rhs_w2(spec.grid, d, spec.mask);

  CellMask active = spec.mask;
  if (active.empty()) active = CellMask::all_active(spec.grid.nx, spec.grid.ny);

  CellSolution sol;
  sol.w1 = ScalarField(spec.grid, 0.0);
  sol.w2 = ScalarField(spec.grid, 0.0);
  SolveReport rep1, rep2;
  try {
    sol.w1.values = solve_spd(A, b1, spec.solver, &active, &rep1);
    sol.w2.values = solve_spd(A, b2, spec.solver, &active, &rep2);
  } catch (const SolverError& e) {
    throw SolverError(std::string("cell problem: ") + e.what());
  }
  sol.residual_w1 = rep1.residual;
  sol.residual_w2 = rep2.residual;

  // Re-anchor exactly and record the defect before the shift.
  sol.mean_w1 = field_mean(sol.w1, spec.mask);
  sol.mean_w2 = field_mean(sol.w2, spec.mask);
  for (int id = 0; id < spec.grid.cells(); ++id) {
    if (spec.mask.is_masked(id)) continue;
    sol.w1.values[id] -= sol.mean_w1;
    sol.w2.values[id] -= sol.mean_w2;
  }

  sol.effective = effective_tensor(sol, spec);
  sol.tortuosity = spec.tensor.active_mean(spec.mask).inverse() * sol.effective;
  return sol;
}

Tensor2 effective_tensor(const CellSolution& sol, const CellProblemSpec& spec) {
  TensorField d = spec.tensor;
  d.zero_masked(spec.mask);
  const FaceSums fs = y_face_sums(spec.grid, d, spec.mask, sol.w1, sol.w2);

  double sum_d11 = 0.0, sum_d12 = 0.0, sum_d21 = 0.0;
  long cells = 0, active_cells = 0;
  for (int id = 0; id < spec.grid.cells(); ++id) {
    ++cells;
    if (spec.mask.is_masked(id)) continue;
    ++active_cells;
    sum_d11 += d.d11[id];
    sum_d12 += d.d12[id];
    sum_d21 += d.d21[id];
  }

  const double cell_norm =
      1.0 / static_cast<double>(spec.average == CellProblemSpec::AverageMode::zero_extension
                                    ? cells
                                    : active_cells);
  const double face_norm =
      1.0 / static_cast<double>(spec.average == CellProblemSpec::AverageMode::zero_extension
                                    ? fs.faces
                                    : fs.active_faces);

  Tensor2 eff;
  eff.d11 = sum_d11 * cell_norm + fs.d12_grad_w1 * face_norm;
  eff.d12 = sum_d12 * cell_norm + fs.d12_grad_w2 * face_norm;
  eff.d21 = sum_d21 * cell_norm + fs.d22_grad_w1 * face_norm;
  eff.d22 = fs.d22_flux_w2 * face_norm;
  return eff;
}

std::vector<SweepEntry> sweep_delta(const CellProblemSpec& spec,
                                    const std::vector<double>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("sweep: empty parameter list");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0)) throw std::invalid_argument("sweep: parameters must be positive");
    if (k > 0 && deltas[k] < deltas[k - 1])
      throw std::invalid_argument("sweep: parameters must be sorted ascending");
  }
  std::vector<SweepEntry> entries(deltas.size());
  run_indexed(static_cast<int>(deltas.size()), [&](int k) {
    SweepEntry& e = entries[static_cast<std::size_t>(k)];
    e.value = deltas[static_cast<std::size_t>(k)];
    try {
      CellProblemSpec s = spec;
      s.delta = e.value;
      const CellSolution sol = solve_cell_functions(s);
      e.effective = sol.effective;
      e.residual_w1 = sol.residual_w1;
      e.residual_w2 = sol.residual_w2;
      e.ok = true;
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  });
  return entries;
}

std::vector<SweepEntry> sweep_eta(const CellProblemSpec& spec, const std::vector<double>& etas) {
  std::vector<SweepEntry> entries = sweep_delta(spec, etas);
  return entries;  // delta = eta per run; values column carries eta
}

}  // namespace memflux
