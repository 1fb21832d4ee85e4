#pragma once

// Helpers shared by the solver translation units.

#include <algorithm>
#include <cmath>
#include <string>

#include "hopca/classic.hpp"
#include "hopca/random.hpp"

namespace hopca::detail {

inline constexpr int kMaxRestarts = 5;

inline bool has_converged(double prev, double cur, double tol, double scale) {
  return std::abs(cur - prev) <= tol * std::max({std::abs(cur), scale, 1e-300});
}

// Removes the components of c lying in span(basis); basis has orthonormal
// columns. Applied twice for numerical stability.
inline void project_out(Vector& c, const Matrix* basis) {
  if (basis == nullptr || basis->cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) c -= *basis * (basis->transpose() * c);
}

inline Matrix initial_factor(const Tensor3& x, int mode, Index K, const SolverConfig& cfg) {
  const Index dim = x.dim(mode);
  Matrix f(dim, K);
  Index filled = 0;
  if (cfg.init == InitMethod::hosvd) {
    filled = std::min(K, dim);
    f.leftCols(filled) = leading_mode_vectors(x, mode, filled);
  }
  Rng rng = make_rng(cfg.seed, 100 + static_cast<std::uint64_t>(mode));
  for (Index k = filled; k < K; ++k) f.col(k) = random_unit(dim, rng);
  return f;
}

// Columns r of X_(mode) (B ⊙ A) where A, B are the other factors in
// increasing mode order.
inline Matrix mttkrp(const Tensor3& x, const Matrix& a, const Matrix& b, int mode) {
  Matrix m(x.dim(mode), a.cols());
  for (Index r = 0; r < a.cols(); ++r) m.col(r) = contract_pair(x, a.col(r), b.col(r), mode);
  return m;
}

inline void check_ranks(const Tensor3& x, const Ranks& ranks) {
  for (int m = 0; m < 3; ++m) {
    if (ranks[m] < 1 || ranks[m] > x.dims()[m]) {
      throw DimensionError("Tucker rank " + std::to_string(ranks[m]) + " invalid for mode " +
                           std::to_string(m + 1) + " of extent " +
                           std::to_string(x.dims()[m]));
    }
  }
}

inline Tensor3 project_core(const Tensor3& x, const Matrix& u, const Matrix& v, const Matrix& w) {
  return mode_mult(mode_mult(mode_mult(x, u.transpose(), 1), v.transpose(), 2), w.transpose(), 3);
}

}  // namespace hopca::detail
