#ifndef MEMFLUX_LINEAR_SOLVER_HPP
#define MEMFLUX_LINEAR_SOLVER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "memflux/grid.hpp"

namespace memflux {

/// Square sparse matrix in row-compressed layout.  No explicit zeros
/// are stored.
struct SparseOperator {
  int n = 0;
  std::vector<int> row_ptr;   // size n+1
  std::vector<int> col_idx;   // size nnz
  std::vector<double> vals;   // size nnz

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  /// Max relative asymmetry |a_ij - a_ji| / max|a|; 0 for symmetric.
  double asymmetry() const;
  double row_sum(int row) const;
};

/// Accumulates (row, col, value) entries; duplicate entries are summed
/// and exact zeros dropped on compression.
class TripletBuilder {
public:
  explicit TripletBuilder(int n) : n_(n) {}
  void add(int row, int col, double value);
  SparseOperator compress() const;
  int dimension() const { return n_; }

private:
  int n_;
  std::vector<int> rows_, cols_;
  std::vector<double> vals_;
};

struct SolverConfig {
  double rel_tolerance = 1e-10;
  double abs_tolerance = 1e-14;
  int max_iterations = 0;  // 0 -> 10 * n

  int resolved_max_iterations(int n) const {
    return max_iterations > 0 ? max_iterations : 10 * n;
  }
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // recomputed ||Ax - b|| at exit, not the recurrence
  bool converged = false;
};

/// Conjugate gradients with diagonal preconditioning for symmetric
/// positive (semi)definite systems.  When zero_mean is given, iterates
/// are projected to zero mean over the active cells each iteration
/// (pure-Neumann/periodic null space handling; the consistent rhs
/// precondition is the caller's).  Throws SolverError on
/// non-convergence, reporting the final residual.
std::vector<double> solve_spd(const SparseOperator& A, std::span<const double> b,
                              const SolverConfig& cfg,
                              const CellMask* zero_mean = nullptr,
                              SolveReport* report = nullptr,
                              std::span<const double> initial_guess = {});

/// Stabilized bi-conjugate gradients with diagonal preconditioning for
/// general nonsingular systems.
std::vector<double> solve_general(const SparseOperator& A, std::span<const double> b,
                                  const SolverConfig& cfg,
                                  SolveReport* report = nullptr,
                                  std::span<const double> initial_guess = {});

}  // namespace memflux

#endif
