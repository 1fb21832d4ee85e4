#include "hopca/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deflation.hpp"
#include "detail.hpp"
#include "hopca/bic.hpp"
#include "lambda_schedule.hpp"

namespace hopca {

using namespace detail;

namespace {

constexpr int kMaxSearchSweeps = 20;

Index count_nonzeros(const Matrix& f) { return (f.array() != 0.0).count(); }

}  // namespace

double sparse_cp_objective(const Tensor3& x, const Vector& u, const Vector& v, const Vector& w,
                           const std::array<double, 3>& lambdas) {
  return contract_all(x, u, v, w) - lambdas[0] * u.lpNorm<1>() - lambdas[1] * v.lpNorm<1>() -
         lambdas[2] * w.lpNorm<1>();
}

SparseRankOne sparse_cp_tpa_rank_one(const Tensor3& x, const std::array<double, 3>& lambdas,
                                     const SolverConfig& cfg) {
  PenaltySpec pen;
  for (std::size_t m = 0; m < 3; ++m) {
    if (lambdas[m] > 0.0) pen[m] = ModePenalty::fixed(lambdas[m]);
    else if (lambdas[m] < 0.0 || !std::isfinite(lambdas[m]))
      throw Error("sparse_cp_tpa: lambda must be finite and non-negative");
  }
  return sparse_cp_tpa_rank_one(x, pen, cfg);
}

SparseRankOne sparse_cp_tpa_rank_one(const Tensor3& x, const PenaltySpec& pen,
                                     const SolverConfig& cfg) {
  cfg.validate();
  LambdaSchedule sched(pen, kMaxSearchSweeps);
  const double total_sq = frob_norm_sq(x);
  const double n_entries = static_cast<double>(x.size());

  SparseRankOne r;
  auto [v, w] = initial_pair(x, cfg);
  Vector u = Vector::Zero(x.n());
  std::array<Vector*, 3> f{&u, &v, &w};
  r.fixed_from = sched.searching() ? LambdaSchedule::kUnset : 0;

  auto zero_result = [&] {
    r.u = Vector::Zero(x.n());
    r.v = Vector::Zero(x.p());
    r.w = Vector::Zero(x.q());
    r.d = 0.0;
    for (std::size_t m = 0; m < 3; ++m) r.lambdas[m] = sched.lambda(m);
    return r;
  };
  if (v.norm() == 0.0 || w.norm() == 0.0) return zero_result();

  double prev = -std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t a = m == 0 ? 1 : 0;
      const std::size_t b = m == 2 ? 1 : 2;
      const Vector c = contract_pair(x, *f[a], *f[b], static_cast<int>(m) + 1);
      const ModePenalty& p = sched.penalty(m);
      const double lam = sched.choose(m, p.lambda_max(c), [&](const std::vector<double>& g) {
        return bic_select(total_sq, n_entries, c, g, p.kind).index;
      });
      Vector t = p.threshold(c, lam);
      const double nrm = t.norm();
      if (!(nrm > 0.0)) {
        r.iterations = it;
        r.converged = true;
        return zero_result();
      }
      *f[m] = t / nrm;
      r.trace.push_back(f[m]->dot(c) - sched.lambda(0) * u.lpNorm<1>() -
                        sched.lambda(1) * v.lpNorm<1>() - sched.lambda(2) * w.lpNorm<1>());
    }
    if (sched.searching() || r.fixed_from == LambdaSchedule::kUnset) {
      if (sched.end_sweep()) {
        r.fixed_from = r.trace.size();
        prev = -std::numeric_limits<double>::infinity();
      }
      continue;
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
  if (r.d < 0.0) {
    w = -w;
    r.d = -r.d;
  }
  if (canonicalize_sign(u) < 0) w = -w;
  if (canonicalize_sign(v) < 0) w = -w;
  r.u = std::move(u);
  r.v = std::move(v);
  r.w = std::move(w);
  for (std::size_t m = 0; m < 3; ++m) r.lambdas[m] = sched.lambda(m);
  return r;
}

SparseCpFit sparse_cp_tpa(const Tensor3& x, Index K, const PenaltySpec& pen,
                          const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("sparse_cp_tpa: K must be >= 1");
  return greedy_deflation(x, K,
                          [&](const Tensor3& r) { return sparse_cp_tpa_rank_one(r, pen, cfg); });
}

// ---------------------------------------------------------------------------
// Sparse CP-ALS

int lasso_gram_cd(const Matrix& gram, const Matrix& linear, double lambda, Matrix& b, bool nonneg,
                  double tol, int max_sweeps) {
  const Index K = gram.rows();
  if (gram.cols() != K || linear.cols() != K || b.rows() != linear.rows() || b.cols() != K) {
    throw DimensionError("lasso_gram_cd: inconsistent shapes");
  }
  int sweep = 0;
  for (sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index i = 0; i < b.rows(); ++i) {
      for (Index k = 0; k < K; ++k) {
        const double gkk = gram(k, k);
        double next = 0.0;
        if (gkk > 0.0) {
          const double r = linear(i, k) - gram.row(k).dot(b.row(i)) + gkk * b(i, k);
          next = (nonneg ? positive_threshold(r, lambda) : soft_threshold(r, lambda)) / gkk;
        }
        max_change = std::max(max_change, std::abs(next - b(i, k)));
        b(i, k) = next;
      }
    }
    const double scale = b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    if (max_change <= tol * std::max(1.0, scale)) break;
  }
  return std::min(sweep, max_sweeps);
}

namespace {

// Least-squares solve B G = M, falling back to the pseudo-inverse.
Matrix solve_gram(const Matrix& gram, const Matrix& linear, bool& used_pinv) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1e-300)) {
    return gram.ldlt().solve(linear.transpose()).transpose();
  }
  used_pinv = true;
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(gram).solve(linear.transpose()).transpose();
}

}  // namespace

SparseCpFit sparse_cp_als(const Tensor3& x, Index K, const PenaltySpec& pen,
                          const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("sparse_cp_als: K must be >= 1");
  LambdaSchedule sched(pen, kMaxSearchSweeps);
  const double total_sq = frob_norm_sq(x);
  const double n_entries = static_cast<double>(x.size());

  std::array<Matrix, 3> f{initial_factor(x, 1, K, cfg), initial_factor(x, 2, K, cfg),
                          initial_factor(x, 3, K, cfg)};
  Vector d = Vector::Ones(K);
  SparseCpFit fit;
  std::vector<double> trace;
  std::size_t fixed_from = sched.searching() ? LambdaSchedule::kUnset : 0;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t a = m == 0 ? 1 : 0;
      const std::size_t b = m == 2 ? 1 : 2;
      // Unit neighbouring factors, so B absorbs the weights.
      const Matrix& fa = f[a];
      const Matrix mm = mttkrp(x, fa, f[b], static_cast<int>(m) + 1);
      const Matrix g = (fa.transpose() * fa).cwiseProduct(f[b].transpose() * f[b]);
      const ModePenalty& p = sched.penalty(m);
      const bool nonneg = p.kind == PenaltyKind::nonneg_lasso;
      Matrix bm;
      if (!p.active()) {
        bm = solve_gram(g, mm, fit.diag.used_pseudo_inverse);
      } else {
        const double lmax = nonneg ? std::max(mm.maxCoeff(), 0.0) : mm.cwiseAbs().maxCoeff();
        const Matrix warm = f[m];
        const double lam = sched.choose(m, lmax, [&](const std::vector<double>& grid) {
          std::size_t best_i = 0;
          double best = std::numeric_limits<double>::infinity();
          Matrix bg = Matrix::Zero(warm.rows(), K);
          // Path from the largest lambda down, warm-started.
          for (std::size_t gi = grid.size(); gi-- > 0;) {
            lasso_gram_cd(g, mm, grid[gi], bg, nonneg);
            const double rss =
                total_sq - 2.0 * bg.cwiseProduct(mm).sum() + (bg * g).cwiseProduct(bg).sum();
            const double val = bic_value(rss, total_sq, n_entries, count_nonzeros(bg));
            if (val < best) {
              best = val;
              best_i = gi;
            }
          }
          return best_i;
        });
        bm = warm;
        lasso_gram_cd(g, mm, lam, bm, nonneg);
      }
      for (Index k = 0; k < K; ++k) {
        const double nrm = bm.col(k).norm();
        d[k] = nrm;
        f[m].col(k) = nrm > 0.0 ? Vector(bm.col(k) / nrm) : Vector::Zero(bm.rows());
      }
    }
    CpModel model{f[0], f[1], f[2], d};
    const double res = cp_residual_norm(x, model);
    double obj = 0.5 * res * res;
    for (std::size_t m = 0; m < 3; ++m) {
      obj += sched.lambda(m) * (f[m] * d.asDiagonal()).lpNorm<1>();
    }
    trace.push_back(obj);
    if (sched.searching() || fixed_from == LambdaSchedule::kUnset) {
      if (sched.end_sweep()) {
        fixed_from = trace.size();
        prev = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    if (has_converged(prev, obj, cfg.tol, 0.5 * total_sq)) {
      converged = true;
      break;
    }
    prev = obj;
  }
  fit.model = {f[0], f[1], f[2], d};
  for (Index k = 0; k < K; ++k) {
    if (d[k] == 0.0) {
      fit.model.U.col(k).setZero();
      fit.model.V.col(k).setZero();
      fit.model.W.col(k).setZero();
    }
  }
  fit.diag.iterations.push_back(std::min(it, cfg.max_iter));
  fit.diag.converged.push_back(converged);
  fit.diag.final_objective.push_back(trace.empty() ? 0.0 : trace.back());
  fit.diag.traces.push_back(std::move(trace));
  fit.diag.fixed_from.push_back(fixed_from);
  fit.diag.computation_order.resize(static_cast<std::size_t>(K));
  std::iota(fit.diag.computation_order.begin(), fit.diag.computation_order.end(), 0);
  sort_and_canonicalize(fit.model, &fit.diag);
  for (Index k = 0; k < K; ++k) {
    fit.diag.lambdas.push_back({sched.lambda(0), sched.lambda(1), sched.lambda(2)});
    fit.diag.nonzeros.push_back({count_nonzeros(Vector(fit.model.U.col(k))),
                                 count_nonzeros(Vector(fit.model.V.col(k))),
                                 count_nonzeros(Vector(fit.model.W.col(k)))});
    if (fit.model.d[k] == 0.0) fit.diag.zero_filled = true;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Sparse PCA and sparse Tucker

namespace {

struct PcaComponent {
  Vector u, v;
  double d = 0.0;
  std::array<double, 2> lambdas{0.0, 0.0};
  int iterations = 0;
};

PcaComponent pca_component(const Matrix& m, const ModePenalty& left, const ModePenalty& right,
                           const SolverConfig& cfg) {
  const std::array<ModePenalty, 2> pens{left, right};
  LambdaSchedule sched(pens, kMaxSearchSweeps);
  const double total_sq = m.squaredNorm();
  const double n_entries = static_cast<double>(m.size());
  PcaComponent out;
  out.u = Vector::Zero(m.rows());
  out.v = Vector::Zero(m.cols());
  if (total_sq == 0.0) return out;

  Vector u = leading_left_singular_vectors(m, 1).col(0);
  Vector v = m.transpose() * u;
  if (!(v.norm() > 0.0)) return out;
  v.normalize();

  bool frozen = !sched.searching();
  double prev = -std::numeric_limits<double>::infinity();
  int it = 0;
  auto update = [&](std::size_t side, const Vector& c, Vector& target) {
    const ModePenalty& p = sched.penalty(side);
    const double lam = sched.choose(side, p.lambda_max(c), [&](const std::vector<double>& g) {
      return bic_select(total_sq, n_entries, c, g, p.kind).index;
    });
    Vector t = p.threshold(c, lam);
    const double nrm = t.norm();
    if (!(nrm > 0.0)) return false;
    target = t / nrm;
    return true;
  };
  for (it = 1; it <= cfg.max_iter; ++it) {
    if (!update(0, m * v, u) || !update(1, m.transpose() * u, v)) {
      out.iterations = it;
      out.lambdas = {sched.lambda(0), sched.lambda(1)};
      return out;
    }
    const double obj = u.dot(m * v) - sched.lambda(0) * u.lpNorm<1>() -
                       sched.lambda(1) * v.lpNorm<1>();
    if (!frozen) {
      if (sched.end_sweep()) {
        frozen = true;
        prev = -std::numeric_limits<double>::infinity();
      }
      continue;
    }
    if (has_converged(prev, obj, cfg.tol, 0.0)) break;
    prev = obj;
  }
  out.iterations = std::min(it, cfg.max_iter);
  out.d = u.dot(m * v);
  if (out.d < 0.0) {
    v = -v;
    out.d = -out.d;
  }
  if (canonicalize_sign(u) < 0) v = -v;
  out.u = std::move(u);
  out.v = std::move(v);
  out.lambdas = {sched.lambda(0), sched.lambda(1)};
  return out;
}

}  // namespace

SparsePcaResult sparse_pca_rank_one(const Matrix& m, double lam_left, double lam_right,
                                    const SolverConfig& cfg) {
  if (!(lam_left >= 0.0) || !(lam_right >= 0.0)) {
    throw Error("sparse_pca: lambda must be non-negative");
  }
  const ModePenalty left = lam_left > 0.0 ? ModePenalty::fixed(lam_left) : ModePenalty::none();
  const ModePenalty right = lam_right > 0.0 ? ModePenalty::fixed(lam_right) : ModePenalty::none();
  return sparse_pca(m, 1, left, right, cfg);
}

SparsePcaResult sparse_pca(const Matrix& m, Index K, const ModePenalty& left,
                           const ModePenalty& right, const SolverConfig& cfg) {
  cfg.validate();
  if (K < 1) throw Error("sparse_pca: K must be >= 1");
  SparsePcaResult res;
  res.U = Matrix::Zero(m.rows(), K);
  res.V = Matrix::Zero(m.cols(), K);
  res.d = Vector::Zero(K);
  Matrix residual = m;
  for (Index k = 0; k < K; ++k) {
    PcaComponent c = pca_component(residual, left, right, cfg);
    res.lambdas.push_back(c.lambdas);
    res.iterations.push_back(c.iterations);
    if (c.d == 0.0) {
      for (Index j = k + 1; j < K; ++j) {
        res.lambdas.push_back(c.lambdas);
        res.iterations.push_back(0);
      }
      break;
    }
    res.U.col(k) = c.u;
    res.V.col(k) = c.v;
    res.d[k] = c.d;
    residual.noalias() -= c.d * c.u * c.v.transpose();
  }
  return res;
}

namespace {

void record_tucker(SparseDiagnostics& diag, const std::array<SparsePcaResult, 3>& parts,
                   const TuckerModel& model) {
  diag.lambdas.clear();
  diag.nonzeros.clear();
  Index kmax = 0;
  for (const auto& p : parts) kmax = std::max(kmax, p.d.size());
  for (Index k = 0; k < kmax; ++k) {
    std::array<double, 3> lam{0.0, 0.0, 0.0};
    std::array<Index, 3> nnz{0, 0, 0};
    const std::array<const Matrix*, 3> f{&model.U, &model.V, &model.W};
    for (std::size_t m = 0; m < 3; ++m) {
      if (k < parts[m].d.size()) {
        lam[m] = parts[m].lambdas[static_cast<std::size_t>(k)][0];
        nnz[m] = count_nonzeros(Vector(f[m]->col(k)));
      }
    }
    diag.lambdas.push_back(lam);
    diag.nonzeros.push_back(nnz);
  }
  for (const auto& p : parts) {
    if ((p.d.array() == 0.0).any()) diag.zero_filled = true;
  }
}

}  // namespace

SparseTuckerFit sparse_hosvd(const Tensor3& x, const Ranks& ranks, const PenaltySpec& pen,
                             const SolverConfig& cfg) {
  cfg.validate();
  check_ranks(x, ranks);
  std::array<SparsePcaResult, 3> parts;
  for (int m = 1; m <= 3; ++m) {
    parts[m - 1] = sparse_pca(matricize(x, m), ranks[m - 1], pen[m - 1], ModePenalty::none(), cfg);
  }
  SparseTuckerFit fit;
  fit.model = {parts[0].U, parts[1].U, parts[2].U,
               project_core(x, parts[0].U, parts[1].U, parts[2].U)};
  fit.diag.iterations.push_back(0);
  fit.diag.converged.push_back(true);
  fit.diag.final_objective.push_back(frob_norm(fit.model.core));
  fit.diag.fixed_from.push_back(0);
  record_tucker(fit.diag, parts, fit.model);
  if (fit.diag.zero_filled) fit.diag.note("some sparse components thresholded to zero");
  return fit;
}

SparseTuckerFit sparse_hooi(const Tensor3& x, const Ranks& ranks, const PenaltySpec& pen,
                            const SolverConfig& cfg) {
  SparseTuckerFit best = sparse_hosvd(x, ranks, pen, cfg);
  double best_norm = frob_norm(best.model.core);
  std::vector<double> trace{best_norm};
  Matrix u = best.model.U, v = best.model.V, w = best.model.W;
  double prev = best_norm;
  bool converged = false;
  int it = 0;
  std::array<SparsePcaResult, 3> parts;
  for (it = 1; it <= cfg.max_iter; ++it) {
    parts[0] = sparse_pca(matricize(mode_mult(mode_mult(x, v.transpose(), 2), w.transpose(), 3), 1),
                          ranks[0], pen[0], ModePenalty::none(), cfg);
    u = parts[0].U;
    parts[1] = sparse_pca(matricize(mode_mult(mode_mult(x, u.transpose(), 1), w.transpose(), 3), 2),
                          ranks[1], pen[1], ModePenalty::none(), cfg);
    v = parts[1].U;
    const Tensor3 xuv = mode_mult(mode_mult(x, u.transpose(), 1), v.transpose(), 2);
    parts[2] = sparse_pca(matricize(xuv, 3), ranks[2], pen[2], ModePenalty::none(), cfg);
    w = parts[2].U;
    const Tensor3 core = mode_mult(xuv, w.transpose(), 3);
    const double obj = frob_norm(core);
    trace.push_back(obj);
    if (obj > best_norm) {
      best_norm = obj;
      best.model = {u, v, w, core};
      record_tucker(best.diag, parts, best.model);
    }
    if (has_converged(prev, obj, cfg.tol, 0.0)) {
      converged = true;
      break;
    }
    prev = obj;
  }
  best.diag.iterations = {std::min(it, cfg.max_iter)};
  best.diag.converged = {converged};
  best.diag.final_objective = {best_norm};
  best.diag.traces = {std::move(trace)};
  return best;
}

}  // namespace hopca
