#include "hopca/generalized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deflation.hpp"
#include "detail.hpp"

namespace hopca {

using namespace detail;

namespace {

double max_asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

bool is_identity(const Matrix& m) { return m.isIdentity(0.0); }

bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

void check_square(const Matrix& m, Index n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(what + " must be " + std::to_string(n) + "x" + std::to_string(n) +
                         ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw NumericalError(what + " has non-finite entries");
}

void check_symmetric_psd(const Matrix& m, const std::string& what, bool require_pd) {
  if (max_asymmetry(m) > 1e-12) throw NumericalError(what + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-10) throw NumericalError(what + " is not positive semi-definite");
  if (require_pd && !(lo > 0.0)) throw NumericalError(what + " is not positive definite");
}

Matrix difference_penalty(Index len, double alpha, const std::vector<double>& stencil) {
  const auto width = static_cast<Index>(stencil.size());
  if (len < width) {
    throw DimensionError("difference penalty needs length >= " + std::to_string(width));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("smoothing alpha must be >= 0");
  Matrix d = Matrix::Zero(len - width + 1, len);
  for (Index r = 0; r < d.rows(); ++r) {
    for (Index c = 0; c < width; ++c) d(r, r + c) = stencil[static_cast<std::size_t>(c)];
  }
  return alpha * (d.transpose() * d);
}

}  // namespace

// ---------------------------------------------------------------------------
// Operators

QuadOperators QuadOperators::identity(const Dims& dims) {
  return {Matrix::Identity(dims[0], dims[0]), Matrix::Identity(dims[1], dims[1]),
          Matrix::Identity(dims[2], dims[2])};
}

const Matrix& QuadOperators::operator[](int mode) const {
  switch (mode) {
    case 1: return q1;
    case 2: return q2;
    case 3: return q3;
    default: throw DimensionError("mode must be 1, 2 or 3");
  }
}

void QuadOperators::validate(const Dims& dims, bool require_pd) const {
  for (int m = 1; m <= 3; ++m) {
    const std::string what = "Q" + std::to_string(m);
    check_square((*this)[m], dims[static_cast<std::size_t>(m - 1)], what);
    check_symmetric_psd((*this)[m], what, require_pd);
  }
}

SmootherSet SmootherSet::zeros(const Dims& dims) {
  return {Matrix::Zero(dims[0], dims[0]), Matrix::Zero(dims[1], dims[1]),
          Matrix::Zero(dims[2], dims[2]), 0.0};
}

SmootherSet SmootherSet::second_diff(const Dims& dims, double alpha) {
  return {second_diff_penalty(dims[0]), second_diff_penalty(dims[1]), second_diff_penalty(dims[2]),
          alpha};
}

SmootherSet SmootherSet::fourth_diff(const Dims& dims, double alpha) {
  return {fourth_diff_penalty(dims[0]), fourth_diff_penalty(dims[1]), fourth_diff_penalty(dims[2]),
          alpha};
}

const Matrix& SmootherSet::omega(int mode) const {
  switch (mode) {
    case 1: return omega_u;
    case 2: return omega_v;
    case 3: return omega_w;
    default: throw DimensionError("mode must be 1, 2 or 3");
  }
}

Matrix SmootherSet::s(int mode) const {
  const Matrix& o = omega(mode);
  Matrix out = Matrix::Identity(o.rows(), o.cols());
  if (alpha != 0.0) out += alpha * o;
  return out;
}

void SmootherSet::validate(const Dims& dims) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("smoothing alpha must be >= 0");
  for (int m = 1; m <= 3; ++m) {
    const std::string what = "Omega" + std::to_string(m);
    check_square(omega(m), dims[static_cast<std::size_t>(m - 1)], what);
    check_symmetric_psd(omega(m), what, false);
  }
}

Matrix second_diff_penalty(Index len, double alpha) {
  return difference_penalty(len, alpha, {1.0, -2.0, 1.0});
}

Matrix fourth_diff_penalty(Index len, double alpha) {
  return difference_penalty(len, alpha, {1.0, -4.0, 6.0, -4.0, 1.0});
}

// ---------------------------------------------------------------------------
// Penalty functions

double L1Penalty::evaluate(const Vector& x) const { return x.lpNorm<1>(); }

Vector L1Penalty::prox(const Vector& y, double scale) const { return soft_threshold(y, scale); }

double NonnegL1Penalty::evaluate(const Vector& x) const {
  if (x.size() > 0 && x.minCoeff() < 0.0) return std::numeric_limits<double>::infinity();
  return x.sum();
}

Vector NonnegL1Penalty::prox(const Vector& y, double scale) const {
  return positive_threshold(y, scale);
}

GroupLassoPenalty::GroupLassoPenalty(std::vector<Index> group_sizes)
    : sizes_(std::move(group_sizes)) {
  if (sizes_.empty()) throw Error("group lasso: no groups");
  for (Index s : sizes_) {
    if (s < 1) throw Error("group lasso: group sizes must be >= 1");
  }
}

GroupLassoPenalty GroupLassoPenalty::uniform(Index length, Index size) {
  if (length < 1 || size < 1) throw Error("group lasso: length and group size must be >= 1");
  std::vector<Index> sizes;
  for (Index start = 0; start < length; start += size) sizes.push_back(std::min(size, length - start));
  return GroupLassoPenalty(std::move(sizes));
}

void GroupLassoPenalty::check_length(Index n) const {
  if (std::accumulate(sizes_.begin(), sizes_.end(), Index{0}) != n) {
    throw DimensionError("group lasso: group sizes do not sum to the factor length " +
                         std::to_string(n));
  }
}

double GroupLassoPenalty::evaluate(const Vector& x) const {
  check_length(x.size());
  double total = 0.0;
  Index start = 0;
  for (Index s : sizes_) {
    total += x.segment(start, s).norm();
    start += s;
  }
  return total;
}

Vector GroupLassoPenalty::prox(const Vector& y, double scale) const {
  check_length(y.size());
  Vector out = Vector::Zero(y.size());
  Index start = 0;
  for (Index s : sizes_) {
    const double nrm = y.segment(start, s).norm();
    if (nrm > scale) out.segment(start, s) = (1.0 - scale / nrm) * y.segment(start, s);
    start += s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// General penalties

SparseRankOne general_cp_tpa_rank_one(const Tensor3& x, const GeneralPenaltySpec& pen,
                                      const SolverConfig& cfg) {
  cfg.validate();
  std::array<double, 3> lam{0.0, 0.0, 0.0};
  for (std::size_t m = 0; m < 3; ++m) {
    if (!(pen[m].lambda >= 0.0) || !std::isfinite(pen[m].lambda)) {
      throw Error("general_cp_tpa: lambda must be finite and non-negative");
    }
    if (pen[m].active()) lam[m] = pen[m].lambda;
  }
  SparseRankOne r;
  r.lambdas = lam;
  auto [v, w] = initial_pair(x, cfg);
  Vector u = Vector::Zero(x.n());
  std::array<Vector*, 3> f{&u, &v, &w};
  auto zero_result = [&] {
    r.u = Vector::Zero(x.n());
    r.v = Vector::Zero(x.p());
    r.w = Vector::Zero(x.q());
    r.d = 0.0;
    return r;
  };
  if (v.norm() == 0.0 || w.norm() == 0.0) return zero_result();
  auto penalty_sum = [&] {
    double s = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
      if (pen[m].active()) s += lam[m] * pen[m].fn->evaluate(*f[m]);
    }
    return s;
  };

  double prev = -std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t a = m == 0 ? 1 : 0;
      const std::size_t b = m == 2 ? 1 : 2;
      const Vector c = contract_pair(x, *f[a], *f[b], static_cast<int>(m) + 1);
      Vector t = pen[m].active() ? pen[m].fn->prox(c, lam[m]) : c;
      const double nrm = t.norm();
      if (!(nrm > 0.0)) {
        r.iterations = it;
        r.converged = true;
        return zero_result();
      }
      *f[m] = t / nrm;
      r.trace.push_back(f[m]->dot(c) - penalty_sum());
    }
    const double obj = r.trace.back();
    if (has_converged(prev, obj, cfg.tol, 0.0)) {
      r.converged = true;
      break;
    }
    prev = obj;
  }
  r.iterations = std::min(it, cfg.max_iter);
  r.d = contract_all(x, u, v, w);
  // The non-negative penalty fixes signs; flipping would leave the orthant.
  const bool signed_free = !pen[2].active() || pen[2].fn->name() != "nonneg";
  if (r.d < 0.0 && signed_free) {
    w = -w;
    r.d = -r.d;
  }
  auto may_flip = [&](std::size_t m) { return !pen[m].active() || pen[m].fn->name() != "nonneg"; };
  if (may_flip(0) && may_flip(2) && canonicalize_sign(u) < 0) w = -w;
  if (may_flip(1) && may_flip(2) && canonicalize_sign(v) < 0) w = -w;
  r.u = std::move(u);
  r.v = std::move(v);
  r.w = std::move(w);
  return r;
}

SparseCpFit general_cp_tpa(const Tensor3& x, Index K, const GeneralPenaltySpec& pen,
                           const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("general_cp_tpa: K must be >= 1");
  return greedy_deflation(x, K,
                          [&](const Tensor3& r) { return general_cp_tpa_rank_one(r, pen, cfg); });
}

// ---------------------------------------------------------------------------
// Q-norm lasso

double qnorm_lasso_kkt(const Vector& y, const Matrix& q, double lam, const Vector& u) {
  const Vector g = q * (u - y);
  double worst = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double viol = u[i] != 0.0 ? std::abs(g[i] + lam * (u[i] > 0.0 ? 1.0 : -1.0))
                                    : std::max(std::abs(g[i]) - lam, 0.0);
    worst = std::max(worst, viol);
  }
  return worst;
}

namespace {

double power_iteration_max_eig(const Matrix& q) {
  Vector x = Vector::Ones(q.rows()).normalized();
  double est = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector y = q * x;
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    const double next = x.dot(y);
    x = y / nrm;
    if (std::abs(next - est) <= 1e-12 * std::abs(next)) return next;
    est = next;
  }
  return est;
}

// Exact solution on a fixed support and sign pattern, if consistent.
bool polish(const Vector& y, const Matrix& q, double lam, Vector& u) {
  std::vector<Index> support;
  for (Index i = 0; i < u.size(); ++i) {
    if (u[i] != 0.0) support.push_back(i);
  }
  const auto k = static_cast<Index>(support.size());
  Vector cand = Vector::Zero(u.size());
  if (k > 0) {
    Matrix qs(k, k);
    Vector rhs(k);
    const Vector qy = q * y;
    for (Index a = 0; a < k; ++a) {
      const Index i = support[static_cast<std::size_t>(a)];
      rhs[a] = qy[i] - lam * (u[i] > 0.0 ? 1.0 : -1.0);
      for (Index b = 0; b < k; ++b) qs(a, b) = q(i, support[static_cast<std::size_t>(b)]);
    }
    const Vector sol = qs.llt().solve(rhs);
    for (Index a = 0; a < k; ++a) {
      const Index i = support[static_cast<std::size_t>(a)];
      if ((sol[a] > 0.0) != (u[i] > 0.0) || sol[a] == 0.0) return false;
      cand[i] = sol[a];
    }
  }
  if (qnorm_lasso_kkt(y, q, lam, cand) > 1e-10 * std::max(1.0, lam)) return false;
  u = std::move(cand);
  return true;
}

}  // namespace

Vector qnorm_lasso_solve(const Vector& y, const Matrix& q, double lam) {
  check_square(q, y.size(), "Q");
  if (!(lam >= 0.0) || !std::isfinite(lam)) throw Error("qnorm_lasso_solve: lambda must be >= 0");
  if (max_asymmetry(q) > 1e-12) throw NumericalError("Q is not symmetric");
  if (q.llt().info() != Eigen::Success) throw NumericalError("Q is not positive definite");
  if (lam == 0.0) return y;
  if (is_diagonal(q)) {
    Vector u(y.size());
    for (Index i = 0; i < y.size(); ++i) u[i] = soft_threshold(y[i], lam / q(i, i));
    return u;
  }
  // Power iteration approaches the top eigenvalue from below; pad the
  // Lipschitz constant so the step stays stable.
  const double L = 1.01 * power_iteration_max_eig(q);
  const double step = 1.0 / L;
  Vector u = y;
  Vector z = u;
  double t = 1.0;
  for (int it = 1; it <= 200000; ++it) {
    const Vector next = soft_threshold(z - step * (q * (z - y)), lam * step);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart the momentum when it points uphill.
    if ((z - next).dot(next - u) > 0.0) {
      z = next;
      t = 1.0;
    } else {
      z = next + ((t - 1.0) / t_next) * (next - u);
      t = t_next;
    }
    u = next;
    if (it % 25 == 0) {
      Vector trial = u;
      if (polish(y, q, lam, trial)) return trial;
      if (qnorm_lasso_kkt(y, q, lam, u) <= 1e-9) return u;
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Generalized CP

namespace {

double qnorm(const Vector& f, const Matrix& q) { return std::sqrt(std::max(f.dot(q * f), 0.0)); }

SparseRankOne gcp_solve(const Tensor3& x, const QuadOperators& q, const std::array<double, 3>& lam,
                        const SolverConfig& cfg) {
  cfg.validate();
  q.validate(x.dims(), true);
  for (double l : lam) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw Error("sparse_gcp: lambda must be >= 0");
  }
  SparseRankOne r;
  r.lambdas = lam;
  auto [v, w] = initial_pair(x, cfg);
  Vector u = Vector::Zero(x.n());
  std::array<Vector*, 3> f{&u, &v, &w};
  auto zero_result = [&] {
    r.u = Vector::Zero(x.n());
    r.v = Vector::Zero(x.p());
    r.w = Vector::Zero(x.q());
    r.d = 0.0;
    return r;
  };
  const double nv = qnorm(v, q.q2), nw = qnorm(w, q.q3);
  if (!(nv > 0.0) || !(nw > 0.0)) return zero_result();
  v /= nv;
  w /= nw;
  // Q f for each factor, kept in step with f.
  std::array<Vector, 3> qf{Vector::Zero(x.n()), q.q2 * v, q.q3 * w};

  double prev = -std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t a = m == 0 ? 1 : 0;
      const std::size_t b = m == 2 ? 1 : 2;
      const int mode = static_cast<int>(m) + 1;
      const Matrix& qm = q[mode];
      const Vector c = contract_pair(x, qf[a], qf[b], mode);
      Vector t = qnorm_lasso_solve(c, qm, lam[m]);
      const double nrm = qnorm(t, qm);
      if (!(nrm > 0.0)) {
        r.iterations = it;
        r.converged = true;
        return zero_result();
      }
      *f[m] = t / nrm;
      qf[m] = qm * *f[m];
      r.trace.push_back(qf[m].dot(c) - lam[0] * u.lpNorm<1>() - lam[1] * v.lpNorm<1>() -
                        lam[2] * w.lpNorm<1>());
    }
    const double obj = r.trace.back();
    if (has_converged(prev, obj, cfg.tol, 0.0)) {
      r.converged = true;
      break;
    }
    prev = obj;
  }
  r.iterations = std::min(it, cfg.max_iter);
  r.d = contract_all(x, qf[0], qf[1], qf[2]);
  if (r.d < 0.0) {
    w = -w;
    r.d = -r.d;
  }
  if (canonicalize_sign(u) < 0) w = -w;
  if (canonicalize_sign(v) < 0) w = -w;
  r.u = std::move(u);
  r.v = std::move(v);
  r.w = std::move(w);
  return r;
}

}  // namespace

SparseRankOne gcp_rank_one(const Tensor3& x, const QuadOperators& q, const SolverConfig& cfg) {
  return gcp_solve(x, q, {0.0, 0.0, 0.0}, cfg);
}

SparseRankOne sparse_gcp_rank_one(const Tensor3& x, const QuadOperators& q,
                                  const std::array<double, 3>& lambdas, const SolverConfig& cfg) {
  return gcp_solve(x, q, lambdas, cfg);
}

SparseCpFit sparse_gcp(const Tensor3& x, Index K, const QuadOperators& q,
                       const std::array<double, 3>& lambdas, const SolverConfig& cfg) {
  if (K < 1) throw Error("sparse_gcp: K must be >= 1");
  return greedy_deflation(x, K, [&](const Tensor3& r) { return gcp_solve(r, q, lambdas, cfg); });
}

// ---------------------------------------------------------------------------
// Functional PCA

Matrix inverse_sqrt_spd(const Matrix& s) {
  if (s.rows() != s.cols()) throw DimensionError("inverse_sqrt_spd: matrix must be square");
  if (is_identity(s)) return s;
  if (max_asymmetry(s) > 1e-12) throw NumericalError("smoother is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector inv_root =
      es.eigenvalues().unaryExpr([](double e) { return 1.0 / std::sqrt(std::max(e, 1e-12)); });
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

Matrix inverse_spd(const Matrix& s) {
  if (is_identity(s)) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector inv = es.eigenvalues().unaryExpr([](double e) { return 1.0 / std::max(e, 1e-12); });
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double quad(const Vector& f, const Matrix& s) { return f.dot(s * f); }

}  // namespace

double fpca_objective(const Tensor3& x, const SmootherSet& s, const Vector& u, const Vector& v,
                      const Vector& w) {
  // ||x - u∘v∘w||^2 - ||u||^2||v||^2||w||^2 cancels to ||x||^2 - 2<x, u∘v∘w>.
  return frob_norm_sq(x) - 2.0 * contract_all(x, u, v, w) +
         quad(u, s.s(1)) * quad(v, s.s(2)) * quad(w, s.s(3));
}

std::array<Vector, 3> fpca_gradient(const Tensor3& x, const SmootherSet& s, const Vector& u,
                                    const Vector& v, const Vector& w) {
  const Matrix su = s.s(1), sv = s.s(2), sw = s.s(3);
  const double qu = quad(u, su), qv = quad(v, sv), qw = quad(w, sw);
  return {Vector(-2.0 * contract_pair(x, v, w, 1) + 2.0 * qv * qw * (su * u)),
          Vector(-2.0 * contract_pair(x, u, w, 2) + 2.0 * qu * qw * (sv * v)),
          Vector(-2.0 * contract_pair(x, u, v, 3) + 2.0 * qu * qv * (sw * w))};
}

std::array<Vector, 3> fpca_rescale(const Tensor3& x, const SmootherSet& s, const Vector& u,
                                   const Vector& v, const Vector& w) {
  const double prod = quad(u, s.s(1)) * quad(v, s.s(2)) * quad(w, s.s(3));
  if (!(prod > 0.0)) return {u, v, w};
  const double scale = std::cbrt(contract_all(x, u, v, w) / prod);
  return {Vector(scale * u), Vector(scale * v), Vector(scale * w)};
}

FpcaRankOne fpca_rank_one(const Tensor3& x, const SmootherSet& s, const SolverConfig& cfg) {
  cfg.validate();
  s.validate(x.dims());
  const std::array<Matrix, 3> sm{s.s(1), s.s(2), s.s(3)};
  const std::array<Matrix, 3> sinv{inverse_spd(sm[0]), inverse_spd(sm[1]), inverse_spd(sm[2])};
  const double total_sq = frob_norm_sq(x);

  FpcaRankOne r;
  auto [v, w] = initial_pair(x, cfg);
  Vector u = Vector::Zero(x.n());
  std::array<Vector*, 3> f{&u, &v, &w};
  std::array<double, 3> q{0.0, quad(v, sm[1]), quad(w, sm[2])};
  bool zero = false;
  double prev = std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= cfg.max_iter && !zero; ++it) {
    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t a = m == 0 ? 1 : 0;
      const std::size_t b = m == 2 ? 1 : 2;
      const double denom = q[a] * q[b];
      if (!(denom > 0.0)) {
        zero = true;
        break;
      }
      const Vector c = contract_pair(x, *f[a], *f[b], static_cast<int>(m) + 1);
      *f[m] = sinv[m] * c / denom;
      q[m] = quad(*f[m], sm[m]);
      r.trace.push_back(total_sq - 2.0 * f[m]->dot(c) + q[0] * q[1] * q[2]);
    }
    if (zero) break;
    // After a block update the objective is ||x||^2 minus this product, so
    // its root tracks the objective; at alpha = 0 it is the TPA weight.
    const double obj = std::sqrt(q[0] * q[1] * q[2]);
    if (has_converged(prev, obj, cfg.tol, 0.0)) {
      r.converged = true;
      break;
    }
    prev = obj;
  }
  r.iterations = std::min(it, cfg.max_iter);
  const double nu = u.norm(), nv = v.norm(), nw = w.norm();
  if (zero || !(nu > 0.0) || !(nv > 0.0) || !(nw > 0.0)) {
    r.u = r.u_unit = Vector::Zero(x.n());
    r.v = r.v_unit = Vector::Zero(x.p());
    r.w = r.w_unit = Vector::Zero(x.q());
    r.d = 0.0;
    return r;
  }
  r.u_unit = u / nu;
  r.v_unit = v / nv;
  r.w_unit = w / nw;
  r.d = nu * nv * nw;
  if (canonicalize_sign(r.u_unit) < 0) r.w_unit = -r.w_unit;
  if (canonicalize_sign(r.v_unit) < 0) r.w_unit = -r.w_unit;
  r.u = std::move(u);
  r.v = std::move(v);
  r.w = std::move(w);
  return r;
}

CpFit fpca(const Tensor3& x, Index K, const SmootherSet& s, const SolverConfig& cfg) {
  if (K < 1) throw Error("fpca: K must be >= 1");
  CpFit fit;
  fit.model = CpModel::zeros(x.dims(), K);
  Tensor3 residual = x;
  Index computed = 0;
  for (Index k = 0; k < K; ++k) {
    FpcaRankOne r = fpca_rank_one(residual, s, cfg);
    if (r.d == 0.0) {
      fit.diag.truncated = true;
      fit.diag.note("component " + std::to_string(k + 1) + " vanished; model truncated");
      break;
    }
    fit.model.U.col(k) = r.u_unit;
    fit.model.V.col(k) = r.v_unit;
    fit.model.W.col(k) = r.w_unit;
    fit.model.d[k] = r.d;
    add_outer3(residual, r.u, r.v, r.w, -1.0);
    fit.diag.iterations.push_back(r.iterations);
    fit.diag.converged.push_back(r.converged);
    fit.diag.final_objective.push_back(r.trace.back());
    fit.diag.traces.push_back(std::move(r.trace));
    ++computed;
  }
  fit.model = fit.model.truncated(computed);
  fit.diag.computation_order.resize(static_cast<std::size_t>(computed));
  std::iota(fit.diag.computation_order.begin(), fit.diag.computation_order.end(), 0);
  sort_and_canonicalize(fit.model, &fit.diag);
  return fit;
}

TuckerFit fpca_half_smoothing(const Tensor3& x, const SmootherSet& s, const Ranks& ranks,
                              const SolverConfig& cfg) {
  s.validate(x.dims());
  const Matrix ru = inverse_sqrt_spd(s.s(1));
  const Matrix rv = inverse_sqrt_spd(s.s(2));
  const Matrix rw = inverse_sqrt_spd(s.s(3));
  const Tensor3 smoothed = mode_mult(mode_mult(mode_mult(x, ru, 1), rv, 2), rw, 3);
  TuckerFit fit = hooi(smoothed, ranks, cfg);
  if (!is_identity(ru)) fit.model.U = ru * fit.model.U;
  if (!is_identity(rv)) fit.model.V = rv * fit.model.V;
  if (!is_identity(rw)) fit.model.W = rw * fit.model.W;
  return fit;
}

}  // namespace hopca
