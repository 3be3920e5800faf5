// Test-only oracles: dense linear algebra and small closed forms kept
// independent of the library's solver path.
#ifndef MEMFLUX_TESTS_ORACLES_HPP
#define MEMFLUX_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "memflux/linear_solver.hpp"

namespace oracles {

using Dense = std::vector<std::vector<double>>;

inline Dense dense_from_sparse(const memflux::SparseOperator& a) {
  Dense m(static_cast<std::size_t>(a.n), std::vector<double>(static_cast<std::size_t>(a.n), 0.0));
  for (int r = 0; r < a.n; ++r)
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) m[r][a.col_idx[k]] += a.vals[k];
  return m;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

/// Minimum-norm (zero-mean) solution of a singular consistent Neumann
/// system via the saddle-point augmentation [A 1; 1^T 0].
inline std::vector<double> dense_neumann_solve(const Dense& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  Dense aug(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> rhs(n + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug[r][c] = a[r][c];
    aug[r][n] = 1.0;
    aug[n][r] = 1.0;
    rhs[r] = b[r];
  }
  std::vector<double> x = dense_solve(aug, rhs);
  x.pop_back();
  return x;
}

/// Deterministic xorshift generator for property-style tests.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  double uniform() {  // in [0,1)
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return static_cast<double>(state_ >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace oracles

#endif
