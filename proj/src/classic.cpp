#include "hopca/classic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hopca/random.hpp"
#include "detail.hpp"

namespace hopca {

using namespace detail;

Matrix leading_left_singular_vectors(const Matrix& a, Index k, Vector* sq_singular) {
  if (a.rows() <= a.cols()) {
    Matrix g = Matrix::Zero(a.rows(), a.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(a);
    g = g.selfadjointView<Eigen::Lower>();
    return leading_eigenvectors(g, k, sq_singular);
  }
  // Tall matrix: eigen-decompose the smaller Gram and map back.
  Vector evals;
  const Index kk = std::min(k, a.cols());
  const Matrix right = leading_eigenvectors(a.transpose() * a, kk, &evals);
  Matrix left = Matrix::Zero(a.rows(), k);
  Index filled = 0;
  for (Index j = 0; j < kk; ++j) {
    Vector col = a * right.col(j);
    const double nrm = col.norm();
    if (!(nrm > 0.0)) break;
    left.col(filled) = col / nrm;
    canonicalize_sign(left.col(filled));
    ++filled;
  }
  // Directions with zero singular value: complete with coordinate vectors.
  for (Index e = 0; filled < k && e < a.rows(); ++e) {
    Vector c = Vector::Unit(a.rows(), e);
    for (int pass = 0; pass < 2; ++pass) {
      c -= left.leftCols(filled) * (left.leftCols(filled).transpose() * c);
    }
    if (c.norm() > 1e-8) left.col(filled++) = c.normalized();
  }
  if (sq_singular != nullptr) {
    *sq_singular = Vector::Zero(a.rows());
    sq_singular->head(evals.size()) = evals;
  }
  return left;
}

void SolverConfig::validate() const {
  if (max_iter < 1) throw Error("SolverConfig: max_iter must be >= 1");
  if (!(tol > 0.0)) throw Error("SolverConfig: tol must be > 0");
}

bool Diagnostics::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
}

Tensor3 CpModel::reconstruct() const {
  Tensor3 x(U.rows(), V.rows(), W.rows());
  for (Index k = 0; k < d.size(); ++k) add_outer3(x, U.col(k), V.col(k), W.col(k), d[k]);
  return x;
}

CpModel CpModel::truncated(Index k) const {
  return {U.leftCols(k), V.leftCols(k), W.leftCols(k), d.head(k)};
}

CpModel CpModel::zeros(const Dims& dims, Index K) {
  return {Matrix::Zero(dims[0], K), Matrix::Zero(dims[1], K), Matrix::Zero(dims[2], K),
          Vector::Zero(K)};
}

Tensor3 TuckerModel::reconstruct() const {
  return mode_mult(mode_mult(mode_mult(core, U, 1), V, 2), W, 3);
}

Matrix leading_eigenvectors(const Matrix& sym, Index k, Vector* eigenvalues) {
  if (k < 0 || k > sym.rows()) {
    throw DimensionError("requested " + std::to_string(k) + " eigenvectors of a " +
                         std::to_string(sym.rows()) + "x" + std::to_string(sym.rows()) +
                         " matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const Index n = sym.rows();
  Matrix out(n, k);
  for (Index j = 0; j < k; ++j) {
    out.col(j) = es.eigenvectors().col(n - 1 - j);
    canonicalize_sign(out.col(j));
  }
  if (eigenvalues != nullptr) *eigenvalues = es.eigenvalues().reverse();
  return out;
}

Matrix leading_mode_vectors(const Tensor3& x, int mode, Index k, Vector* sq_singular) {
  const Index rows = x.dim(mode);
  const Index cols = static_cast<Index>(x.size()) / rows;
  if (rows <= cols) return leading_eigenvectors(mode_gram(x, mode), k, sq_singular);
  return leading_left_singular_vectors(matricize(x, mode), k, sq_singular);
}

double canonicalize_sign(Eigen::Ref<Vector> col) {
  if (col.size() == 0) return 1.0;
  Index imax = 0;
  col.cwiseAbs().maxCoeff(&imax);
  if (col[imax] < 0.0) {
    col = -col;
    return -1.0;
  }
  return 1.0;
}

std::pair<Vector, Vector> initial_pair(const Tensor3& x, const SolverConfig& cfg,
                                       std::uint64_t stream) {
  if (cfg.init == InitMethod::hosvd && stream == 0) {
    return {leading_mode_vectors(x, 2, 1).col(0), leading_mode_vectors(x, 3, 1).col(0)};
  }
  Rng rng = make_rng(cfg.seed, stream);
  Vector v = random_unit(x.p(), rng);
  Vector w = random_unit(x.q(), rng);
  return {v, w};
}

// ---------------------------------------------------------------------------
// Tensor power algorithm

namespace {

struct OrthoBasis {
  const Matrix* u = nullptr;
  const Matrix* v = nullptr;
  const Matrix* w = nullptr;
};

RankOne power_rank_one(const Tensor3& x, const SolverConfig& cfg, const OrthoBasis& basis) {
  RankOne r;
  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    auto [v, w] = initial_pair(x, cfg, static_cast<std::uint64_t>(attempt));
    project_out(v, basis.v);
    project_out(w, basis.w);
    if (v.norm() == 0.0 || w.norm() == 0.0) continue;
    v.normalize();
    w.normalize();
    Vector u(x.n());
    std::vector<double> trace;
    double prev = -std::numeric_limits<double>::infinity();
    bool zero = false;
    bool converged = false;
    int it = 0;
    auto update = [&](Vector& target, Vector c, const Matrix* b) {
      project_out(c, b);
      const double nrm = c.norm();
      if (!(nrm > 0.0)) {
        zero = true;
        return;
      }
      target = c / nrm;
      trace.push_back(nrm);
    };
    for (it = 1; it <= cfg.max_iter; ++it) {
      update(u, contract_pair(x, v, w, 1), basis.u);
      if (zero) break;
      update(v, contract_pair(x, u, w, 2), basis.v);
      if (zero) break;
      update(w, contract_pair(x, u, v, 3), basis.w);
      if (zero) break;
      const double obj = trace.back();
      if (has_converged(prev, obj, cfg.tol, 0.0)) {
        converged = true;
        break;
      }
      prev = obj;
    }
    if (zero) continue;
    r.u = std::move(u);
    r.v = std::move(v);
    r.w = std::move(w);
    r.d = contract_all(x, r.u, r.v, r.w);
    if (r.d < 0.0) {
      r.w = -r.w;
      r.d = -r.d;
    }
    if (canonicalize_sign(r.u) < 0) r.w = -r.w;
    if (canonicalize_sign(r.v) < 0) r.w = -r.w;
    r.iterations = std::min(it, cfg.max_iter);
    r.converged = converged;
    r.trace = std::move(trace);
    return r;
  }
  r.u = Vector::Zero(x.n());
  r.v = Vector::Zero(x.p());
  r.w = Vector::Zero(x.q());
  r.d = 0.0;
  return r;
}

}  // namespace

RankOne tpa_rank_one(const Tensor3& x, const SolverConfig& cfg) {
  cfg.validate();
  return power_rank_one(x, cfg, {});
}

void sort_and_canonicalize(CpModel& model, Diagnostics* diag) {
  const Index K = model.rank();
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return model.d[a] > model.d[b]; });
  CpModel sorted = CpModel::zeros({model.U.rows(), model.V.rows(), model.W.rows()}, K);
  for (Index k = 0; k < K; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    sorted.U.col(k) = model.U.col(src);
    sorted.V.col(k) = model.V.col(src);
    sorted.W.col(k) = model.W.col(src);
    sorted.d[k] = model.d[src];
    if (canonicalize_sign(sorted.U.col(k)) < 0) sorted.W.col(k) = -sorted.W.col(k);
    if (canonicalize_sign(sorted.V.col(k)) < 0) sorted.W.col(k) = -sorted.W.col(k);
  }
  model = std::move(sorted);
  if (diag != nullptr) {
    std::vector<int> computed(order.begin(), order.end());
    if (!diag->computation_order.empty()) {
      for (auto& c : computed) c = diag->computation_order[static_cast<std::size_t>(c)];
    }
    diag->computation_order = std::move(computed);
  }
}

CpFit tpa(const Tensor3& x, Index K, const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("tpa: K must be >= 1");
  CpFit fit;
  fit.model = CpModel::zeros(x.dims(), K);
  Tensor3 residual = x;
  Index computed = 0;
  for (Index k = 0; k < K; ++k) {
    OrthoBasis basis;
    Matrix bu, bv, bw;
    if (cfg.orthogonalize && k > 0) {
      bu = fit.model.U.leftCols(k);
      bv = fit.model.V.leftCols(k);
      bw = fit.model.W.leftCols(k);
      basis = {&bu, &bv, &bw};
    }
    RankOne r = power_rank_one(residual, cfg, basis);
    if (r.d == 0.0) {
      fit.diag.truncated = true;
      fit.diag.note("component " + std::to_string(k + 1) +
                    " has zero weight; model truncated to " + std::to_string(k) +
                    " components");
      break;
    }
    fit.model.U.col(k) = r.u;
    fit.model.V.col(k) = r.v;
    fit.model.W.col(k) = r.w;
    fit.model.d[k] = r.d;
    add_outer3(residual, r.u, r.v, r.w, -r.d);
    fit.diag.iterations.push_back(r.iterations);
    fit.diag.converged.push_back(r.converged);
    fit.diag.final_objective.push_back(r.d);
    fit.diag.traces.push_back(std::move(r.trace));
    ++computed;
  }
  fit.model = fit.model.truncated(computed);
  fit.diag.computation_order.resize(static_cast<std::size_t>(computed));
  std::iota(fit.diag.computation_order.begin(), fit.diag.computation_order.end(), 0);
  sort_and_canonicalize(fit.model, &fit.diag);
  return fit;
}

// ---------------------------------------------------------------------------
// CP-ALS

double cp_residual_norm(const Tensor3& x, const CpModel& model) {
  const Index K = model.rank();
  double cross = 0.0;
  for (Index r = 0; r < K; ++r) {
    if (model.d[r] == 0.0) continue;
    cross += model.d[r] * contract_all(x, model.U.col(r), model.V.col(r), model.W.col(r));
  }
  const Matrix g = (model.U.transpose() * model.U)
                       .cwiseProduct(model.V.transpose() * model.V)
                       .cwiseProduct(model.W.transpose() * model.W);
  const double model_sq = model.d.dot(g * model.d);
  return std::sqrt(std::max(frob_norm_sq(x) - 2.0 * cross + model_sq, 0.0));
}

CpFit cp_als(const Tensor3& x, Index K, const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("cp_als: K must be >= 1");
  CpFit fit;
  std::array<Matrix, 3> f{initial_factor(x, 1, K, cfg), initial_factor(x, 2, K, cfg),
                          initial_factor(x, 3, K, cfg)};
  Vector d = Vector::Ones(K);
  const double xnorm = frob_norm(x);
  std::vector<double> trace;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (int mode = 1; mode <= 3; ++mode) {
      const Matrix& a = f[mode == 1 ? 1 : 0];
      const Matrix& b = f[mode == 3 ? 1 : 2];
      const Matrix m = mttkrp(x, a, b, mode);
      const Matrix g = (a.transpose() * a).cwiseProduct(b.transpose() * b);
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      Matrix sol;
      const double emax = es.eigenvalues().maxCoeff();
      if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(emax, 1e-300)) {
        fit.diag.used_pseudo_inverse = true;
        sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(g).solve(m.transpose()).transpose();
      } else {
        sol = g.ldlt().solve(m.transpose()).transpose();
      }
      Matrix& target = f[mode - 1];
      for (Index r = 0; r < K; ++r) {
        const double nrm = sol.col(r).norm();
        d[r] = nrm;
        if (nrm > 0.0) target.col(r) = sol.col(r) / nrm;
      }
    }
    const double res = cp_residual_norm(x, {f[0], f[1], f[2], d});
    trace.push_back(res);
    if (has_converged(prev, res, cfg.tol, xnorm)) {
      converged = true;
      break;
    }
    prev = res;
  }
  if (fit.diag.used_pseudo_inverse) fit.diag.note("singular normal equations solved by pseudo-inverse");
  fit.model = {f[0], f[1], f[2], d};
  fit.diag.iterations.push_back(std::min(it, cfg.max_iter));
  fit.diag.converged.push_back(converged);
  fit.diag.final_objective.push_back(trace.empty() ? 0.0 : trace.back());
  fit.diag.traces.push_back(std::move(trace));
  sort_and_canonicalize(fit.model, &fit.diag);
  return fit;
}

// ---------------------------------------------------------------------------
// Tucker

namespace {

void note_gap(Diagnostics& diag, int mode, const Vector& sq_singular, Index k) {
  if (k >= sq_singular.size()) return;
  const double gap = sq_singular[k - 1] - sq_singular[k];
  if (gap <= 1e-10 * std::max(sq_singular[0], 1e-300)) {
    std::ostringstream os;
    os << "mode " << mode << " singular values tie at rank cutoff (gap " << gap << ")";
    diag.note(os.str());
  }
}

}  // namespace

TuckerFit hosvd(const Tensor3& x, const Ranks& ranks) {
  check_ranks(x, ranks);
  TuckerFit fit;
  std::array<Matrix, 3> f;
  for (int m = 1; m <= 3; ++m) {
    Vector s;
    f[m - 1] = leading_mode_vectors(x, m, ranks[m - 1], &s);
    note_gap(fit.diag, m, s, ranks[m - 1]);
  }
  fit.model = {f[0], f[1], f[2], project_core(x, f[0], f[1], f[2])};
  fit.diag.iterations.push_back(0);
  fit.diag.converged.push_back(true);
  fit.diag.final_objective.push_back(frob_norm(fit.model.core));
  return fit;
}

TuckerFit hooi(const Tensor3& x, const Ranks& ranks, const SolverConfig& cfg) {
  cfg.validate();
  TuckerFit fit = hosvd(x, ranks);
  Matrix u = fit.model.U, v = fit.model.V, w = fit.model.W;
  std::vector<double> trace{frob_norm(fit.model.core)};
  double prev = trace.back();
  bool converged = false;
  int it = 0;
  Vector s;
  for (it = 1; it <= cfg.max_iter; ++it) {
    u = leading_mode_vectors(mode_mult(mode_mult(x, v.transpose(), 2), w.transpose(), 3), 1,
                             ranks[0], &s);
    v = leading_mode_vectors(mode_mult(mode_mult(x, u.transpose(), 1), w.transpose(), 3), 2,
                             ranks[1], &s);
    const Tensor3 xuv = mode_mult(mode_mult(x, u.transpose(), 1), v.transpose(), 2);
    w = leading_mode_vectors(xuv, 3, ranks[2], &s);
    const double obj = frob_norm(mode_mult(xuv, w.transpose(), 3));
    trace.push_back(obj);
    if (has_converged(prev, obj, cfg.tol, 0.0)) {
      converged = true;
      break;
    }
    prev = obj;
  }
  fit.model = {u, v, w, project_core(x, u, v, w)};
  fit.diag = {};
  fit.diag.iterations.push_back(std::min(it, cfg.max_iter));
  fit.diag.converged.push_back(converged);
  fit.diag.final_objective.push_back(frob_norm(fit.model.core));
  fit.diag.traces.push_back(std::move(trace));
  return fit;
}

}  // namespace hopca
