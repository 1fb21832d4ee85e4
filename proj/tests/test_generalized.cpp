#include <doctest.h>

#include "hopca/generalized.hpp"
#include "test_util.hpp"

using namespace hopca;
using namespace hopca::test;

namespace {

// Explicit (len-order) x len difference operator by repeated differencing.
Matrix diff_operator(Index len, int order) {
  Matrix d = Matrix::Identity(len, len);
  for (int o = 0; o < order; ++o) {
    Matrix next(d.rows() - 1, len);
    for (Index r = 0; r + 1 < d.rows(); ++r) next.row(r) = d.row(r + 1) - d.row(r);
    d = next;
  }
  return d;
}

double fd_norm(const Tensor3& x, const SmootherSet& s, const Vector& u, const Vector& v,
               const Vector& w) {
  // Central finite differences of fpca_objective, one coordinate at a time.
  const double h = 1e-5;
  double sq = 0.0;
  std::array<Vector, 3> f{u, v, w};
  for (std::size_t m = 0; m < 3; ++m) {
    for (Index i = 0; i < f[m].size(); ++i) {
      auto plus = f, minus = f;
      plus[m][i] += h;
      minus[m][i] -= h;
      const double g = (fpca_objective(x, s, plus[0], plus[1], plus[2]) -
                        fpca_objective(x, s, minus[0], minus[1], minus[2])) /
                       (2 * h);
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

}  // namespace

TEST_SUITE("generalized-functional") {
  TEST_CASE("difference penalties equal D^T D") {
    for (Index len : {6, 9}) {
      const Matrix d2 = diff_operator(len, 2), d4 = diff_operator(len, 4);
      CHECK((second_diff_penalty(len, 2.0) - 2.0 * d2.transpose() * d2).norm() < 1e-12);
      CHECK((fourth_diff_penalty(len) - d4.transpose() * d4).norm() < 1e-12);
    }
    const SmootherSet s = SmootherSet::second_diff({5, 6, 7}, 0.5);
    CHECK((s.s(2) - (Matrix::Identity(6, 6) + 0.5 * second_diff_penalty(6))).norm() < 1e-12);
    CHECK_THROWS(SmootherSet::second_diff({5, 6, 7}, -1.0).validate({5, 6, 7}));
  }

  TEST_CASE("penalty proximal operators") {
    Vector y(4);
    y << 3.0, -1.0, 0.5, -4.0;
    const L1Penalty l1;
    CHECK(l1.evaluate(y) == 8.5);
    CHECK(l1.prox(y, 1.0).isApprox(Vector(Eigen::Vector4d(2.0, 0.0, 0.0, -3.0))));
    const NonnegL1Penalty nn;
    CHECK(nn.prox(y, 1.0).isApprox(Vector(Eigen::Vector4d(2.0, 0.0, 0.0, 0.0))));
    CHECK(std::isinf(nn.evaluate(y)));
    const GroupLassoPenalty grp = GroupLassoPenalty::uniform(4, 2);
    CHECK(grp.evaluate(y) == doctest::Approx(std::sqrt(10.0) + std::sqrt(16.25)));
    const Vector p = grp.prox(y, 2.0);
    const double s1 = 1.0 - 2.0 / std::sqrt(10.0), s2 = 1.0 - 2.0 / std::sqrt(16.25);
    CHECK((p.head(2) - s1 * y.head(2)).norm() < 1e-12);
    CHECK((p.tail(2) - s2 * y.tail(2)).norm() < 1e-12);
    CHECK(grp.prox(y, 10.0).isZero());
    CHECK(GroupLassoPenalty::uniform(5, 2).group_sizes() == std::vector<Index>{2, 2, 1});
  }

  TEST_CASE("general penalty with L1 matches Sparse CP-TPA") {
    const Tensor3 x = random_tensor(7, 6, 5, 3);
    const std::array<double, 3> lam{0.8, 0.4, 0.0};
    GeneralPenaltySpec pen;
    pen[0] = {std::make_shared<L1Penalty>(), lam[0]};
    pen[1] = {std::make_shared<L1Penalty>(), lam[1]};
    const SparseRankOne g = general_cp_tpa_rank_one(x, pen);
    const SparseRankOne s = sparse_cp_tpa_rank_one(x, lam);
    CHECK((g.u - s.u).norm() < 1e-12);
    CHECK((g.w - s.w).norm() < 1e-12);
    CHECK(g.d == doctest::Approx(s.d));
  }

  TEST_CASE("group lasso zeroes whole groups") {
    const Tensor3 x = random_tensor(8, 6, 5, 4);
    GeneralPenaltySpec pen;
    pen[0] = {std::make_shared<GroupLassoPenalty>(GroupLassoPenalty::uniform(8, 2)), 1.5};
    const SparseCpFit fit = general_cp_tpa(x, 1, pen);
    const Vector u = fit.model.U.col(0);
    for (Index g = 0; g < 4; ++g) {
      CHECK(((u[2 * g] == 0.0) == (u[2 * g + 1] == 0.0)));
    }
  }

  TEST_CASE("Q-norm lasso: diagonal closed form, lambda zero, KKT") {
    const Vector y = random_vec(10, 5);
    const Vector qd = random_vec(10, 6).cwiseAbs().array() + 0.2;
    const Matrix q = qd.asDiagonal();
    const double lam = 0.3;
    const Vector u = qnorm_lasso_solve(y, q, lam);
    for (Index i = 0; i < 10; ++i) CHECK(std::abs(u[i] - soft_threshold(y[i], lam / qd[i])) <= 1e-8);
    CHECK(qnorm_lasso_solve(y, random_spd(10, 3), 0.0) == y);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Index n = 3 + static_cast<Index>(seed % 18);
      const Matrix qs = random_spd(n, seed, 0.1);
      const Vector ys = random_vec(n, seed, 2);
      const Vector us = qnorm_lasso_solve(ys, qs, 0.2);
      CHECK(qnorm_lasso_kkt(ys, qs, 0.2, us) <= 1e-8);
    }
  }

  TEST_CASE("Q-norm lasso KKT residual is computed independently") {
    // Optimality: q (y - u) in lam * subdifferential of ||u||_1.
    const Matrix q = random_spd(6, 9);
    const Vector y = random_vec(6, 10);
    const Vector u = qnorm_lasso_solve(y, q, 0.5);
    const Vector g = q * (y - u);
    for (Index i = 0; i < 6; ++i) {
      if (u[i] != 0.0) CHECK(std::abs(g[i] - 0.5 * (u[i] > 0 ? 1.0 : -1.0)) < 1e-8);
      else CHECK(std::abs(g[i]) <= 0.5 + 1e-8);
    }
  }

  TEST_CASE("Generalized CP with identity operators is TPA") {
    const Tensor3 x = random_tensor(7, 6, 5, 11);
    const SparseRankOne g = gcp_rank_one(x, QuadOperators::identity(x.dims()));
    const RankOne t = tpa_rank_one(x);
    CHECK((g.u - t.u).norm() < 1e-8);
    CHECK((g.v - t.v).norm() < 1e-8);
    CHECK((g.w - t.w).norm() < 1e-8);
    CHECK(g.d == doctest::Approx(t.d).epsilon(1e-10));
    const std::array<double, 3> lam{0.5, 0.0, 0.2};
    const SparseRankOne sg = sparse_gcp_rank_one(x, QuadOperators::identity(x.dims()), lam);
    const SparseRankOne st = sparse_cp_tpa_rank_one(x, lam);
    CHECK((sg.u - st.u).norm() < 1e-8);
    CHECK((sg.w - st.w).norm() < 1e-8);
  }

  TEST_CASE("Generalized CP factors satisfy the Q-norm constraint") {
    const Tensor3 x = random_tensor(6, 5, 4, 12);
    const QuadOperators q{random_spd(6, 1), random_spd(5, 2), random_spd(4, 3)};
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const SparseRankOne r = sparse_gcp_rank_one(x, q, {0.1, 0.1, 0.0}, cfg);
    CHECK(r.u.dot(q.q1 * r.u) == doctest::Approx(1.0));
    CHECK(r.w.dot(q.q3 * r.w) == doctest::Approx(1.0));
    const Vector qu = q.q1 * r.u, qv = q.q2 * r.v, qw = q.q3 * r.w;
    CHECK(r.d == doctest::Approx(contract_all(x, qu, qv, qw)));
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] - 1e-10);
    CHECK_THROWS(gcp_rank_one(x, QuadOperators{Matrix::Identity(3, 3), q.q2, q.q3}));
  }

  TEST_CASE("FPCA gradient matches finite differences") {
    const Tensor3 x = random_tensor(5, 4, 6, 13);
    const SmootherSet s = SmootherSet::second_diff(x.dims(), 0.7);
    const Vector u = random_vec(5, 1), v = random_vec(4, 2), w = random_vec(6, 3);
    const auto g = fpca_gradient(x, s, u, v, w);
    const double h = 1e-6;
    for (Index i = 0; i < 5; ++i) {
      Vector up = u, um = u;
      up[i] += h;
      um[i] -= h;
      const double fd =
          (fpca_objective(x, s, up, v, w) - fpca_objective(x, s, um, v, w)) / (2 * h);
      CHECK(g[0][i] == doctest::Approx(fd).epsilon(1e-5));
    }
    const double direct = frob_norm_sq(x - naive_outer(u, v, w)) +
                          u.dot(s.s(1) * u) * v.dot(s.s(2) * v) * w.dot(s.s(3) * w) -
                          u.squaredNorm() * v.squaredNorm() * w.squaredNorm();
    CHECK(fpca_objective(x, s, u, v, w) == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("FPCA objective is non-increasing and reaches a stationary point") {
    const Tensor3 x = random_tensor(6, 6, 6, 14);
    const SmootherSet s = SmootherSet::second_diff(x.dims(), 1.0);
    SolverConfig cfg;
    cfg.tol = 1e-14;
    cfg.max_iter = 5000;
    const FpcaRankOne r = fpca_rank_one(x, s, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-10);
    CHECK(fd_norm(x, s, r.u, r.v, r.w) <= 1e-5);
    const auto scaled = fpca_rescale(x, s, 2.0 * r.u, r.v, r.w);
    CHECK(fpca_objective(x, s, scaled[0], scaled[1], scaled[2]) <=
          fpca_objective(x, s, 2.0 * r.u, r.v, r.w) + 1e-10);
  }

  TEST_CASE("FPCA without smoothing is the TPA rank-one fit") {
    const Tensor3 x = random_tensor(6, 5, 4, 15);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iter = 5000;
    const FpcaRankOne f = fpca_rank_one(x, SmootherSet::zeros(x.dims()), cfg);
    const RankOne t = tpa_rank_one(x, cfg);
    CHECK(max_abs_diff(naive_outer(f.u, f.v, f.w), naive_outer(t.u, t.v, t.w, t.d)) < 1e-8);
    CHECK(f.d == doctest::Approx(t.d).epsilon(1e-8));
  }

  TEST_CASE("inverse square root") {
    const Matrix s = random_spd(5, 16);
    const Matrix r = inverse_sqrt_spd(s);
    CHECK((r * s * r - Matrix::Identity(5, 5)).norm() < 1e-10);
    CHECK((inverse_sqrt_spd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);
  }

  TEST_CASE("half-smoothing without smoothing is HOOI") {
    const Tensor3 x = random_tensor(6, 5, 4, 17);
    const TuckerFit h = fpca_half_smoothing(x, SmootherSet::zeros(x.dims()), {2, 2, 2});
    const TuckerFit o = hooi(x, {2, 2, 2});
    CHECK(max_abs_diff(h.model.reconstruct(), o.model.reconstruct()) < 1e-8);
  }

  TEST_CASE("multi-component FPCA returns unit factors") {
    const Tensor3 x = random_tensor(6, 5, 4, 18);
    const CpFit fit = fpca(x, 2, SmootherSet::second_diff(x.dims(), 0.5));
    for (Index k = 0; k < 2; ++k) CHECK(fit.model.U.col(k).norm() == doctest::Approx(1.0));
    CHECK(fit.model.d[0] >= fit.model.d[1]);
  }
}
