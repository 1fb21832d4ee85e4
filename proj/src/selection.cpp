#include "hopca/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hopca/sparse.hpp"

namespace hopca {

namespace {

// Orthonormal basis B of span(a) with B B^T = projection_matrix(a).
Matrix range_basis(const Matrix& a) {
  if (a.cols() == 0) return Matrix::Zero(a.rows(), 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0)) return Matrix::Zero(a.rows(), 0);
  std::vector<Index> keep;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-12 * top) keep.push_back(i);
  }
  Matrix b(a.rows(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    b.col(static_cast<Index>(j)) = a * es.eigenvectors().col(keep[j]) / std::sqrt(ev[keep[j]]);
  }
  return b;
}

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return a.dot(b) / (na * nb);
}

// Greedy maximum-score assignment of rows (truth) to columns (estimate).
std::vector<Index> greedy_match(const Matrix& score) {
  std::vector<Index> match(static_cast<std::size_t>(score.rows()), -1);
  std::vector<bool> used(static_cast<std::size_t>(score.cols()), false);
  const Index pairs = std::min(score.rows(), score.cols());
  for (Index n = 0; n < pairs; ++n) {
    double best = -1.0;
    Index bi = -1, bj = -1;
    for (Index i = 0; i < score.rows(); ++i) {
      if (match[static_cast<std::size_t>(i)] >= 0) continue;
      for (Index j = 0; j < score.cols(); ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        if (score(i, j) > best) {
          best = score(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    match[static_cast<std::size_t>(bi)] = bj;
    used[static_cast<std::size_t>(bj)] = true;
  }
  return match;
}

RecoveryMetrics empty_metrics(Index K) {
  RecoveryMetrics r;
  const auto k = static_cast<std::size_t>(K);
  r.tp.assign(k, {0.0, 0.0, 0.0});
  r.fp.assign(k, {0.0, 0.0, 0.0});
  r.matched.assign(k, {-1, -1, -1});
  r.signs.assign(k, {1.0, 1.0, 1.0});
  return r;
}

}  // namespace

Matrix projection_matrix(const Matrix& a) {
  const Matrix b = range_basis(a);
  return b * b.transpose();
}

VarianceReport variance_explained(const Tensor3& x, const Matrix& U, const Matrix& V,
                                  const Matrix& W, Index upto_k, bool keep_projections) {
  const double total = frob_norm_sq(x);
  if (!(total > 0.0)) throw NumericalError("variance explained is undefined for a zero tensor");
  if (U.rows() != x.n() || V.rows() != x.p() || W.rows() != x.q()) {
    throw DimensionError("factor rows do not match tensor dimensions");
  }
  const Index kmax = std::max({U.cols(), V.cols(), W.cols()});
  if (upto_k < 1 || upto_k > kmax) {
    throw DimensionError("upto_k must be between 1 and the number of components");
  }
  VarianceReport rep;
  for (Index k = 1; k <= upto_k; ++k) {
    const Matrix bu = range_basis(U.leftCols(std::min(k, U.cols())));
    const Matrix bv = range_basis(V.leftCols(std::min(k, V.cols())));
    const Matrix bw = range_basis(W.leftCols(std::min(k, W.cols())));
    double ratio = 0.0;
    if (bu.cols() > 0 && bv.cols() > 0 && bw.cols() > 0) {
      // ||x ×1 P_U ×2 P_V ×3 P_W|| = ||x ×1 B_U^T ×2 B_V^T ×3 B_W^T|| for P = B B^T.
      const Tensor3 core =
          mode_mult(mode_mult(mode_mult(x, bu.transpose(), 1), bv.transpose(), 2), bw.transpose(), 3);
      ratio = std::clamp(frob_norm_sq(core) / total, 0.0, 1.0);
    }
    rep.cumulative.push_back(ratio);
    if (keep_projections) {
      rep.projections.push_back(
          {Matrix(bu * bu.transpose()), Matrix(bv * bv.transpose()), Matrix(bw * bw.transpose())});
    }
  }
  return rep;
}

VarianceReport variance_explained(const Tensor3& x, const CpModel& model, Index upto_k,
                                  bool keep_projections) {
  if (upto_k > model.rank()) throw DimensionError("upto_k exceeds the model rank");
  return variance_explained(x, model.U, model.V, model.W, upto_k, keep_projections);
}

double component_variance(const Tensor3& x, const CpModel& model, Index k) {
  if (k < 0 || k >= model.rank()) throw DimensionError("component index out of range");
  return variance_explained(x, model.U.col(k), model.V.col(k), model.W.col(k), 1).cumulative[0];
}

// ---------------------------------------------------------------------------

std::pair<double, double> support_rates(const Vector& estimate, const SupportMask& truth_col) {
  if (estimate.size() != truth_col.rows()) throw DimensionError("support length mismatch");
  Index true_nz = 0, true_z = 0, hits = 0, false_pos = 0;
  for (Index i = 0; i < estimate.size(); ++i) {
    const bool est = estimate[i] != 0.0;
    if (truth_col(i, 0)) {
      ++true_nz;
      if (est) ++hits;
    } else {
      ++true_z;
      if (est) ++false_pos;
    }
  }
  const double tp = true_nz > 0 ? double(hits) / double(true_nz) : 0.0;
  const double fp = true_z > 0 ? double(false_pos) / double(true_z) : 0.0;
  return {tp, fp};
}

std::pair<double, double> support_rates(const Vector& estimate, const Vector& truth) {
  return support_rates(estimate, SupportMask(truth.array() != 0.0));
}

RecoveryMetrics support_metrics(const CpModel& est, const SimTruth& truth) {
  const CpModel& t = truth.model;
  if (est.U.rows() != t.U.rows() || est.V.rows() != t.V.rows() || est.W.rows() != t.W.rows()) {
    throw DimensionError("estimated and true models have different dimensions");
  }
  RecoveryMetrics r = empty_metrics(t.rank());
  r.k_mismatch = est.rank() != t.rank();
  Matrix score(t.rank(), est.rank());
  for (Index i = 0; i < t.rank(); ++i) {
    for (Index j = 0; j < est.rank(); ++j) {
      score(i, j) = std::abs(cosine(t.U.col(i), est.U.col(j)) * cosine(t.V.col(i), est.V.col(j)) *
                             cosine(t.W.col(i), est.W.col(j)));
    }
  }
  const std::vector<Index> match = greedy_match(score);
  const std::array<const Matrix*, 3> tf{&t.U, &t.V, &t.W};
  const std::array<const Matrix*, 3> ef{&est.U, &est.V, &est.W};
  for (Index i = 0; i < t.rank(); ++i) {
    const Index j = match[static_cast<std::size_t>(i)];
    const auto ki = static_cast<std::size_t>(i);
    if (j < 0) continue;
    for (std::size_t m = 0; m < 3; ++m) {
      const auto [tp, fp] = support_rates(Vector(ef[m]->col(j)), SupportMask(truth.support[m].col(i)));
      r.tp[ki][m] = tp;
      r.fp[ki][m] = fp;
      r.matched[ki][m] = j;
      r.signs[ki][m] = cosine(tf[m]->col(i), ef[m]->col(j)) < 0.0 ? -1.0 : 1.0;
    }
  }
  r.mse = signal_mse(est, truth);
  return r;
}

RecoveryMetrics support_metrics(const TuckerModel& est, const SimTruth& truth) {
  const CpModel& t = truth.model;
  RecoveryMetrics r = empty_metrics(t.rank());
  const std::array<const Matrix*, 3> tf{&t.U, &t.V, &t.W};
  const std::array<const Matrix*, 3> ef{&est.U, &est.V, &est.W};
  for (std::size_t m = 0; m < 3; ++m) {
    if (ef[m]->rows() != tf[m]->rows()) throw DimensionError("factor dimensions differ");
    if (ef[m]->cols() != t.rank()) r.k_mismatch = true;
    Matrix score(t.rank(), ef[m]->cols());
    for (Index i = 0; i < t.rank(); ++i) {
      for (Index j = 0; j < ef[m]->cols(); ++j) {
        score(i, j) = std::abs(cosine(tf[m]->col(i), ef[m]->col(j)));
      }
    }
    const std::vector<Index> match = greedy_match(score);
    for (Index i = 0; i < t.rank(); ++i) {
      const Index j = match[static_cast<std::size_t>(i)];
      const auto ki = static_cast<std::size_t>(i);
      if (j < 0) continue;
      const auto [tp, fp] = support_rates(Vector(ef[m]->col(j)), SupportMask(truth.support[m].col(i)));
      r.tp[ki][m] = tp;
      r.fp[ki][m] = fp;
      r.matched[ki][m] = j;
      r.signs[ki][m] = cosine(tf[m]->col(i), ef[m]->col(j)) < 0.0 ? -1.0 : 1.0;
    }
  }
  r.mse = signal_mse(est.reconstruct(), truth);
  return r;
}

double signal_mse(const Tensor3& xhat, const SimTruth& truth) {
  if (xhat.dims() != truth.signal.dims()) throw DimensionError("signal dimensions differ");
  return (xhat.flat() - truth.signal.flat()).squaredNorm() / static_cast<double>(xhat.size());
}

double signal_mse(const CpModel& estimated, const SimTruth& truth) {
  return signal_mse(estimated.reconstruct(), truth);
}

// ---------------------------------------------------------------------------

Matrix naive_threshold(const Matrix& f, double fraction) {
  Matrix out = f;
  for (Index k = 0; k < f.cols(); ++k) {
    const double top = f.col(k).cwiseAbs().maxCoeff();
    const double cut = fraction * top;
    for (Index i = 0; i < f.rows(); ++i) {
      if (std::abs(f(i, k)) <= cut) out(i, k) = 0.0;
    }
  }
  return out;
}

std::vector<double> default_roc_grid() {
  std::vector<double> g(21);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 20.0;
  return g;
}

std::vector<RocPoint> roc_sweep(const Tensor3& x, const SimTruth& truth, const std::string& method,
                                const std::vector<double>& grid, const SolverConfig& cfg) {
  if (grid.empty()) throw Error("roc_sweep: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error("roc_sweep: grid must be strictly increasing");
  }
  const Index K = truth.model.rank();
  const Ranks ranks{K, K, K};
  std::vector<RocPoint> out;
  auto emit = [&](std::size_t gi, const RecoveryMetrics& met) {
    for (Index k = 0; k < K; ++k) {
      for (int m = 1; m <= 3; ++m) {
        if (!truth.sparse_modes[static_cast<std::size_t>(m - 1)]) continue;
        const auto ki = static_cast<std::size_t>(k);
        const auto mi = static_cast<std::size_t>(m - 1);
        out.push_back({gi, grid[gi], k, m, met.tp[ki][mi], met.fp[ki][mi]});
      }
    }
  };

  if (method == "naive-cp") {
    const CpFit base = cp_als(x, K, cfg);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      CpModel m = base.model;
      if (truth.sparse_modes[0]) m.U = naive_threshold(m.U, grid[gi]);
      if (truth.sparse_modes[1]) m.V = naive_threshold(m.V, grid[gi]);
      if (truth.sparse_modes[2]) m.W = naive_threshold(m.W, grid[gi]);
      emit(gi, support_metrics(m, truth));
    }
    return out;
  }
  if (method == "naive-tucker") {
    const TuckerFit base = hooi(x, ranks, cfg);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      TuckerModel m = base.model;
      if (truth.sparse_modes[0]) m.U = naive_threshold(m.U, grid[gi]);
      if (truth.sparse_modes[1]) m.V = naive_threshold(m.V, grid[gi]);
      if (truth.sparse_modes[2]) m.W = naive_threshold(m.W, grid[gi]);
      emit(gi, support_metrics(m, truth));
    }
    return out;
  }

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    PenaltySpec pen;
    for (std::size_t m = 0; m < 3; ++m) {
      if (truth.sparse_modes[m]) pen[m] = ModePenalty::fixed_relative(grid[gi]);
    }
    if (method == "sparse-cp-tpa") {
      emit(gi, support_metrics(sparse_cp_tpa(x, K, pen, cfg).model, truth));
    } else if (method == "sparse-cp-als") {
      emit(gi, support_metrics(sparse_cp_als(x, K, pen, cfg).model, truth));
    } else if (method == "sparse-hosvd") {
      emit(gi, support_metrics(sparse_hosvd(x, ranks, pen, cfg).model, truth));
    } else if (method == "sparse-hooi") {
      emit(gi, support_metrics(sparse_hooi(x, ranks, pen, cfg).model, truth));
    } else {
      throw Error("roc_sweep: unknown method '" + method + "'");
    }
  }
  return out;
}

}  // namespace hopca
