#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hopca/tensor.hpp"

namespace hopca {

enum class InitMethod { hosvd, random };

struct SolverConfig {
  int max_iter = 500;
  double tol = 1e-6;  // relative change of the sweep objective
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::hosvd;
  bool orthogonalize = false;  // Gram-Schmidt against earlier components (TPA)

  void validate() const;
};

/// Per-run record of how a solver terminated. Components are listed in the
/// order they were computed.
struct Diagnostics {
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<std::vector<double>> traces;  // objective after every update
  std::vector<double> final_objective;
  std::vector<int> computation_order;  // greedy index of each returned column
  std::vector<std::string> notes;
  bool used_pseudo_inverse = false;
  bool truncated = false;

  void note(std::string msg) { notes.push_back(std::move(msg)); }
  [[nodiscard]] bool all_converged() const;
};

/// Sum of K weighted rank-one terms d_k u_k ∘ v_k ∘ w_k.
struct CpModel {
  Matrix U, V, W;
  Vector d;

  [[nodiscard]] Index rank() const noexcept { return d.size(); }
  [[nodiscard]] Tensor3 reconstruct() const;
  /// Keeps only the first k components.
  [[nodiscard]] CpModel truncated(Index k) const;
  static CpModel zeros(const Dims& dims, Index K);
};

/// core ×1 U ×2 V ×3 W. Orthonormal factors for the unregularized
/// algorithms; the sparse Tucker variants relax that.
struct TuckerModel {
  Matrix U, V, W;
  Tensor3 core;

  [[nodiscard]] Tensor3 reconstruct() const;
};

struct CpFit {
  CpModel model;
  Diagnostics diag;
};

struct TuckerFit {
  TuckerModel model;
  Diagnostics diag;
};

struct RankOne {
  Vector u, v, w;
  double d = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

using Ranks = std::array<Index, 3>;

// Shared building blocks.

/// Leading `k` eigenvectors of a symmetric PSD matrix, ordered by
/// decreasing eigenvalue; also returns all eigenvalues in decreasing order.
Matrix leading_eigenvectors(const Matrix& sym, Index k, Vector* eigenvalues = nullptr);

/// Leading `k` left singular vectors of a dense matrix, via the smaller
/// Gram matrix. Directions beyond the rank are completed orthonormally.
Matrix leading_left_singular_vectors(const Matrix& a, Index k, Vector* sq_singular = nullptr);

/// Leading `k` left singular vectors of the mode-`mode` unfolding of x.
Matrix leading_mode_vectors(const Tensor3& x, int mode, Index k, Vector* sq_singular = nullptr);

/// Flips signs so the largest-magnitude entry of the column is positive.
/// Returns -1 if the column was flipped, +1 otherwise.
double canonicalize_sign(Eigen::Ref<Vector> col);

/// Starting (v, w) pair for the greedy rank-one solvers.
std::pair<Vector, Vector> initial_pair(const Tensor3& x, const SolverConfig& cfg,
                                       std::uint64_t stream = 0);

// Unregularized decompositions.

CpFit cp_als(const Tensor3& x, Index K, const SolverConfig& cfg = {});

/// ALS residual ||x - model|| computed from factor Gram matrices.
double cp_residual_norm(const Tensor3& x, const CpModel& model);

TuckerFit hosvd(const Tensor3& x, const Ranks& ranks);
TuckerFit hooi(const Tensor3& x, const Ranks& ranks, const SolverConfig& cfg = {});

/// Rank-one tensor power iteration. Trace entries are the objective
/// x ×1 u ×2 v ×3 w after every factor update.
RankOne tpa_rank_one(const Tensor3& x, const SolverConfig& cfg = {});

/// Greedy deflation with tpa_rank_one. Components are returned sorted by
/// decreasing weight; diag.computation_order keeps the greedy order.
CpFit tpa(const Tensor3& x, Index K, const SolverConfig& cfg = {});

/// Reorders CP components by decreasing weight and applies the sign
/// convention (u and v canonical, w absorbs the remaining sign).
void sort_and_canonicalize(CpModel& model, Diagnostics* diag);

}  // namespace hopca
