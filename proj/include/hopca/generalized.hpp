#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "hopca/classic.hpp"
#include "hopca/sparse.hpp"

namespace hopca {

/// One symmetric PSD operator per mode, defining the norm
/// ||x||^2_Q = <x, x ×1 Q1 ×2 Q2 ×3 Q3>.
struct QuadOperators {
  Matrix q1, q2, q3;

  static QuadOperators identity(const Dims& dims);
  [[nodiscard]] const Matrix& operator[](int mode) const;
  /// Checks shapes against dims, symmetry within 1e-12 and PSD-ness. With
  /// `require_pd` the smallest eigenvalue must be strictly positive.
  void validate(const Dims& dims, bool require_pd) const;
};

/// Roughness penalties for functional PCA; S_m = I + alpha * Omega_m.
struct SmootherSet {
  Matrix omega_u, omega_v, omega_w;
  double alpha = 1.0;

  static SmootherSet zeros(const Dims& dims);
  static SmootherSet second_diff(const Dims& dims, double alpha);
  static SmootherSet fourth_diff(const Dims& dims, double alpha);

  [[nodiscard]] const Matrix& omega(int mode) const;
  [[nodiscard]] Matrix s(int mode) const;
  void validate(const Dims& dims) const;
};

/// alpha * D^T D with D the (len-2) x len second-difference operator.
Matrix second_diff_penalty(Index len, double alpha = 1.0);
/// alpha * D^T D with D the (len-4) x len fourth-difference operator.
Matrix fourth_diff_penalty(Index len, double alpha = 1.0);

/// Convex penalty, homogeneous of order one.
class PenaltyFn {
 public:
  virtual ~PenaltyFn() = default;
  [[nodiscard]] virtual double evaluate(const Vector& x) const = 0;
  /// argmin_z 1/2 ||y - z||^2 + scale * P(z).
  [[nodiscard]] virtual Vector prox(const Vector& y, double scale) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

class L1Penalty final : public PenaltyFn {
 public:
  [[nodiscard]] double evaluate(const Vector& x) const override;
  [[nodiscard]] Vector prox(const Vector& y, double scale) const override;
  [[nodiscard]] std::string name() const override { return "lasso"; }
};

/// ||x||_1 restricted to the non-negative orthant (infinite elsewhere).
class NonnegL1Penalty final : public PenaltyFn {
 public:
  [[nodiscard]] double evaluate(const Vector& x) const override;
  [[nodiscard]] Vector prox(const Vector& y, double scale) const override;
  [[nodiscard]] std::string name() const override { return "nonneg"; }
};

/// Sum of Euclidean norms over contiguous groups.
class GroupLassoPenalty final : public PenaltyFn {
 public:
  explicit GroupLassoPenalty(std::vector<Index> group_sizes);
  /// Groups of equal size `size` (the last one may be shorter).
  static GroupLassoPenalty uniform(Index length, Index size);

  [[nodiscard]] double evaluate(const Vector& x) const override;
  [[nodiscard]] Vector prox(const Vector& y, double scale) const override;
  [[nodiscard]] std::string name() const override { return "group"; }
  [[nodiscard]] const std::vector<Index>& group_sizes() const { return sizes_; }

 private:
  std::vector<Index> sizes_;
  void check_length(Index n) const;
};

/// A penalty function and its weight for one mode; no function means no
/// penalty.
struct GeneralPenalty {
  std::shared_ptr<const PenaltyFn> fn;
  double lambda = 0.0;

  [[nodiscard]] bool active() const { return fn != nullptr && lambda > 0.0; }
};

using GeneralPenaltySpec = std::array<GeneralPenalty, 3>;

/// Rank-one CP-TPA with general penalties: each update applies the
/// penalty's prox to the contraction, then normalizes or returns zero.
/// Trace entries are x ×1 u ×2 v ×3 w - sum lambda_m P_m(f_m).
SparseRankOne general_cp_tpa_rank_one(const Tensor3& x, const GeneralPenaltySpec& pen,
                                      const SolverConfig& cfg = {});

SparseCpFit general_cp_tpa(const Tensor3& x, Index K, const GeneralPenaltySpec& pen,
                           const SolverConfig& cfg = {});

/// argmin_u 1/2 (y - u)^T q (y - u) + lam ||u||_1 for positive definite q.
/// Diagonal q uses the separable closed form; otherwise proximal gradient
/// with step 1/L followed by an exact solve on the detected support.
Vector qnorm_lasso_solve(const Vector& y, const Matrix& q, double lam);

/// Largest violation of the optimality conditions of qnorm_lasso_solve.
double qnorm_lasso_kkt(const Vector& y, const Matrix& q, double lam, const Vector& u);

/// Rank-one Generalized CP. Factors satisfy f^T Q f = 1 and
/// d = x ×1 Q1 u ×2 Q2 v ×3 Q3 w >= 0. Trace entries are that product after
/// every update.
SparseRankOne gcp_rank_one(const Tensor3& x, const QuadOperators& q, const SolverConfig& cfg = {});

/// Rank-one Sparse Generalized CP. Trace entries are
/// x ×1 Q1 u ×2 Q2 v ×3 Q3 w - sum lambda_m ||f_m||_1.
SparseRankOne sparse_gcp_rank_one(const Tensor3& x, const QuadOperators& q,
                                  const std::array<double, 3>& lambdas,
                                  const SolverConfig& cfg = {});

/// Greedy deflation of sparse_gcp_rank_one (lambdas all zero gives
/// Generalized CP), subtracting d u ∘ v ∘ w.
SparseCpFit sparse_gcp(const Tensor3& x, Index K, const QuadOperators& q,
                       const std::array<double, 3>& lambdas, const SolverConfig& cfg = {});

struct FpcaRankOne {
  Vector u, v, w;  // unnormalized, as produced by the block updates
  // Equivalent normalized form u_unit ∘ v_unit ∘ w_unit scaled by d.
  Vector u_unit, v_unit, w_unit;
  double d = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // tri-convex objective after every update
};

/// ||x - u∘v∘w||^2 + (u^T S_u u)(v^T S_v v)(w^T S_w w) - ||u||^2 ||v||^2 ||w||^2.
double fpca_objective(const Tensor3& x, const SmootherSet& s, const Vector& u, const Vector& v,
                      const Vector& w);

/// Block gradients of fpca_objective with respect to u, v and w.
std::array<Vector, 3> fpca_gradient(const Tensor3& x, const SmootherSet& s, const Vector& u,
                                    const Vector& v, const Vector& w);

/// Rescales (u, v, w) by the objective-minimizing common factor t, split
/// as t^(1/3) per mode.
std::array<Vector, 3> fpca_rescale(const Tensor3& x, const SmootherSet& s, const Vector& u,
                                   const Vector& v, const Vector& w);

FpcaRankOne fpca_rank_one(const Tensor3& x, const SmootherSet& s, const SolverConfig& cfg = {});

/// Deflation with fpca_rank_one, reported in normalized CP form.
CpFit fpca(const Tensor3& x, Index K, const SmootherSet& s, const SolverConfig& cfg = {});

/// Inverse square root of a symmetric positive definite matrix via its
/// eigendecomposition (eigenvalues floored at 1e-12).
Matrix inverse_sqrt_spd(const Matrix& s);

/// Half-smooths x, takes its HOOI and maps the components back by S^(-1/2).
TuckerFit fpca_half_smoothing(const Tensor3& x, const SmootherSet& s, const Ranks& ranks,
                              const SolverConfig& cfg = {});

}  // namespace hopca
