#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hopca/tensor.hpp"
#include "test_util.hpp"

using namespace hopca;
using namespace hopca::test;

TEST_SUITE("tensor-core") {
  TEST_CASE("storage order is mode-1 fastest") {
    Tensor3 x(2, 3, 4);
    x(1, 2, 3) = 5.0;
    CHECK(x.values()[1 + 2 * 2 + 2 * 3 * 3] == 5.0);
    CHECK(x.dim(1) == 2);
    CHECK(x.dim(3) == 4);
    CHECK_THROWS_AS(Tensor3(0, 3, 4), DimensionError);
    CHECK_THROWS(Tensor3({2, 2, 1}, {1.0, 2.0, NAN, 4.0}));
  }

  TEST_CASE("matricize matches the index formula and round-trips") {
    const Tensor3 x = random_tensor(3, 4, 5, 1);
    const Matrix m1 = matricize(x, 1), m2 = matricize(x, 2), m3 = matricize(x, 3);
    CHECK(m1.rows() == 3);
    CHECK(m1.cols() == 20);
    CHECK(m2.rows() == 4);
    CHECK(m3.rows() == 5);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j)
        for (Index k = 0; k < 5; ++k) {
          CHECK(m1(i, j + 4 * k) == x(i, j, k));
          CHECK(m2(j, i + 3 * k) == x(i, j, k));
          CHECK(m3(k, i + 3 * j) == x(i, j, k));
        }
    for (int mode = 1; mode <= 3; ++mode) {
      CHECK(fold(matricize(x, mode), mode, x.dims()) == x);
    }
    CHECK_THROWS(matricize(x, 4));
  }

  TEST_CASE("mode product equals unfolding product") {
    const Tensor3 x = random_tensor(3, 4, 5, 2);
    for (int mode = 1; mode <= 3; ++mode) {
      const Matrix m = random_mat(2, x.dim(mode), 3, static_cast<std::uint64_t>(mode));
      const Tensor3 y = mode_mult(x, m, mode);
      CHECK(y.dim(mode) == 2);
      const Matrix expect = m * matricize(x, mode);
      CHECK((matricize(y, mode) - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(mode_mult(x, Matrix::Ones(2, 7), 1), DimensionError);
  }

  TEST_CASE("contractions agree with explicit sums") {
    const Tensor3 x = random_tensor(4, 5, 6, 4);
    const Vector u = random_vec(4, 5, 1), v = random_vec(5, 5, 2), w = random_vec(6, 5, 3);
    double all = 0.0;
    Vector c1 = Vector::Zero(4), c2 = Vector::Zero(5), c3 = Vector::Zero(6);
    Matrix cv = Matrix::Zero(4, 6);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 5; ++j)
        for (Index k = 0; k < 6; ++k) {
          all += x(i, j, k) * u[i] * v[j] * w[k];
          c1[i] += x(i, j, k) * v[j] * w[k];
          c2[j] += x(i, j, k) * u[i] * w[k];
          c3[k] += x(i, j, k) * u[i] * v[j];
          cv(i, k) += x(i, j, k) * v[j];
        }
    CHECK(contract_all(x, u, v, w) == doctest::Approx(all).epsilon(1e-12));
    CHECK((contract_pair(x, v, w, 1) - c1).norm() < 1e-12);
    CHECK((contract_pair(x, u, w, 2) - c2).norm() < 1e-12);
    CHECK((contract_pair(x, u, v, 3) - c3).norm() < 1e-12);
    CHECK((contract_vec(x, v, 2) - cv).norm() < 1e-12);
  }

  TEST_CASE("khatri-rao columns are Kronecker products") {
    const Matrix a = random_mat(3, 2, 6), b = random_mat(4, 2, 7);
    const Matrix kr = khatri_rao(a, b);
    REQUIRE(kr.rows() == 12);
    for (Index c = 0; c < 2; ++c)
      for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(kr(j + 4 * i, c) == a(i, c) * b(j, c));
    // X_(1) = U diag(d) (W ⊙ V)^T for a CP tensor.
    const Vector u = random_vec(3, 8), v = random_vec(4, 9), w = random_vec(5, 10);
    const Tensor3 x = outer3(u, v, w, 2.0);
    const Matrix rhs = 2.0 * u * khatri_rao(w, v).transpose();
    CHECK((matricize(x, 1) - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("outer products, norms and the Q-norm") {
    const Vector u = random_vec(3, 1), v = random_vec(4, 2), w = random_vec(5, 3);
    const Tensor3 x = outer3(u, v, w, 1.5);
    CHECK(max_abs_diff(x, naive_outer(u, v, w, 1.5)) < 1e-14);
    Tensor3 y(3, 4, 5);
    add_outer3(y, u, v, w, 1.5);
    CHECK(max_abs_diff(x, y) < 1e-14);
    CHECK(frob_norm(x) == doctest::Approx(1.5 * u.norm() * v.norm() * w.norm()));
    CHECK(frob_norm_sq(x) == doctest::Approx(inner(x, x)));
    const Matrix q1 = random_spd(3, 1), q2 = random_spd(4, 2), q3 = random_spd(5, 3);
    const double expect =
        1.5 * std::sqrt(u.dot(q1 * u) * v.dot(q2 * v) * w.dot(q3 * w));
    CHECK(qnorm3(x, q1, q2, q3) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("mode gram equals unfolding gram") {
    const Tensor3 x = random_tensor(3, 4, 5, 12);
    for (int mode = 1; mode <= 3; ++mode) {
      const Matrix m = matricize(x, mode);
      CHECK((mode_gram(x, mode) - m * m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("t3 files round-trip exactly and reject bad input") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hopca_tensor_test";
    fs::create_directories(dir);
    const Tensor3 x = random_tensor(2, 3, 4, 13);
    write_t3(dir / "x.t3", x);
    CHECK(read_t3(dir / "x.t3") == x);
    {
      std::ofstream bad(dir / "bad.t3");
      bad << "tensor3 2 2 2\n1 2 3\n";
    }
    CHECK_THROWS_AS(read_t3(dir / "bad.t3"), IoError);
    CHECK_THROWS_AS(read_t3(dir / "missing.t3"), IoError);
    fs::remove_all(dir);
  }
}
