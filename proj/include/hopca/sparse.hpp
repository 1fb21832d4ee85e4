#pragma once

#include <array>

#include "hopca/classic.hpp"
#include "hopca/penalty.hpp"

namespace hopca {

struct SparseDiagnostics : Diagnostics {
  std::vector<std::array<double, 3>> lambdas;  // per component, per mode
  std::vector<std::array<Index, 3>> nonzeros;
  // Index into the component's trace from which all lambdas were fixed.
  std::vector<std::size_t> fixed_from;
  bool zero_filled = false;
};

struct SparseRankOne {
  Vector u, v, w;
  double d = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // penalized objective after every update
  std::array<double, 3> lambdas{0.0, 0.0, 0.0};
  std::size_t fixed_from = 0;
};

struct SparseCpFit {
  CpModel model;
  SparseDiagnostics diag;
};

struct SparseTuckerFit {
  TuckerModel model;  // factors may be sparse and non-orthonormal
  SparseDiagnostics diag;
};

/// Penalized rank-one objective x ×1 u ×2 v ×3 w - sum_m lambda_m ||f_m||_1.
double sparse_cp_objective(const Tensor3& x, const Vector& u, const Vector& v, const Vector& w,
                           const std::array<double, 3>& lambdas);

/// Rank-one Sparse CP-TPA with fixed lasso penalties (lambda_u, lambda_v,
/// lambda_w). Each update soft-thresholds the contraction and rescales it
/// to unit norm, or sets the factor to zero.
SparseRankOne sparse_cp_tpa_rank_one(const Tensor3& x, const std::array<double, 3>& lambdas,
                                     const SolverConfig& cfg = {});

/// Rank-one Sparse CP-TPA with a full per-mode penalty description. Modes
/// with a grid select lambda by BIC at each update until the selection is
/// stable, then iterate with lambda fixed.
SparseRankOne sparse_cp_tpa_rank_one(const Tensor3& x, const PenaltySpec& pen,
                                     const SolverConfig& cfg = {});

/// Greedy deflation of sparse_cp_tpa_rank_one. A zero component ends the
/// deflation; it and all later components are zero-filled.
SparseCpFit sparse_cp_tpa(const Tensor3& x, Index K, const PenaltySpec& pen,
                          const SolverConfig& cfg = {});

/// Row-separable lasso in Gram form: minimizes
///   1/2 tr(B G B^T) - tr(B^T M) + lambda ||B||_1
/// by cyclic coordinate descent starting from `b`. Equivalent to
/// 1/2 ||X - B A^T||^2 + lambda ||B||_1 with G = A^T A and M = X A.
/// Returns the number of sweeps.
int lasso_gram_cd(const Matrix& gram, const Matrix& linear, double lambda, Matrix& b,
                  bool nonneg = false, double tol = 1e-8, int max_sweeps = 10000);

/// Sparse CP-ALS: CP-ALS with each least-squares update replaced by a lasso.
/// Not a descent method for any joint objective; the trace records the
/// penalized loss 1/2 ||x - model||^2 + sum lambda ||F||_1 for inspection.
SparseCpFit sparse_cp_als(const Tensor3& x, Index K, const PenaltySpec& pen,
                          const SolverConfig& cfg = {});

struct SparsePcaResult {
  Matrix U, V;
  Vector d;
  std::vector<std::array<double, 2>> lambdas;
  std::vector<int> iterations;
};

/// Rank-one penalized SVD by alternating thresholding, initialized at the
/// leading singular pair. Returns d = 0 and zero vectors if a factor
/// vanishes.
SparsePcaResult sparse_pca_rank_one(const Matrix& m, double lam_left, double lam_right,
                                    const SolverConfig& cfg = {});

/// K components by deflation m <- m - d u v^T.
SparsePcaResult sparse_pca(const Matrix& m, Index K, const ModePenalty& left,
                           const ModePenalty& right, const SolverConfig& cfg = {});

/// Each mode's factor holds the leading sparse principal components of the
/// corresponding unfolding.
SparseTuckerFit sparse_hosvd(const Tensor3& x, const Ranks& ranks, const PenaltySpec& pen,
                             const SolverConfig& cfg = {});

/// Sparse HOOI, initialized by sparse_hosvd. Runs cfg.max_iter sweeps at most
/// and returns the sweep with the largest core norm.
SparseTuckerFit sparse_hooi(const Tensor3& x, const Ranks& ranks, const PenaltySpec& pen,
                            const SolverConfig& cfg = {});

}  // namespace hopca
