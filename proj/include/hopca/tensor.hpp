#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hopca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy shared by every module.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

using Dims = std::array<Index, 3>;

/// Dense third-order tensor. Entry (i, j, k) is stored at offset
/// i + n*j + n*p*k, i.e. mode-1 index fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  /// Zero tensor of the given size. Every extent must be positive.
  Tensor3(Index n, Index p, Index q);
  explicit Tensor3(const Dims& dims) : Tensor3(dims[0], dims[1], dims[2]) {}
  /// Takes ownership of values laid out mode-1 fastest; rejects NaN/Inf.
  Tensor3(const Dims& dims, std::vector<double> values);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] Index dim(int mode) const { return dims_.at(mode - 1); }
  [[nodiscard]] Index n() const noexcept { return dims_[0]; }
  [[nodiscard]] Index p() const noexcept { return dims_[1]; }
  [[nodiscard]] Index q() const noexcept { return dims_[2]; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  double& operator()(Index i, Index j, Index k) noexcept {
    return values_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }
  double operator()(Index i, Index j, Index k) const noexcept {
    return values_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] double* data() noexcept { return values_.data(); }
  [[nodiscard]] const double* data() const noexcept { return values_.data(); }

  // Flat views for BLAS-style kernels.
  [[nodiscard]] Eigen::Map<const Vector> flat() const {
    return {values_.data(), static_cast<Index>(values_.size())};
  }
  [[nodiscard]] Eigen::Map<Vector> flat() {
    return {values_.data(), static_cast<Index>(values_.size())};
  }

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  bool operator==(const Tensor3&) const = default;

  [[nodiscard]] bool all_finite() const noexcept;

 private:
  Dims dims_{0, 0, 0};
  std::vector<double> values_;
};

/// Unfolds along `mode` (1, 2 or 3). Mode 1 is n x (p*q) with column
/// j + p*k; mode 2 is p x (n*q) with column i + n*k; mode 3 is q x (n*p)
/// with column i + n*j.
Matrix matricize(const Tensor3& x, int mode);

/// Inverse of matricize.
Tensor3 fold(const Matrix& m, int mode, const Dims& dims);

/// x ×_mode m: replaces dims[mode] by m.rows().
Tensor3 mode_mult(const Tensor3& x, const Matrix& m, int mode);

/// Contracts one mode against a vector, leaving a matrix over the two
/// remaining modes in increasing mode order.
Matrix contract_vec(const Tensor3& x, const Vector& v, int mode);

/// Contracts the two modes other than `free_mode` against `a` and `b`
/// (given in increasing mode order). Returns a vector over `free_mode`.
/// For free_mode = 1 this is x ×2 a ×3 b.
Vector contract_pair(const Tensor3& x, const Vector& a, const Vector& b, int free_mode);

/// x ×1 u ×2 v ×3 w.
double contract_all(const Tensor3& x, const Vector& u, const Vector& v, const Vector& w);

/// Column-wise Kronecker product; column k is a_k ⊗ b_k.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// d * u ∘ v ∘ w.
Tensor3 outer3(const Vector& u, const Vector& v, const Vector& w, double d = 1.0);

/// Adds `scale * u ∘ v ∘ w` into x in place.
void add_outer3(Tensor3& x, const Vector& u, const Vector& v, const Vector& w, double scale);

double frob_norm(const Tensor3& x);
double frob_norm_sq(const Tensor3& x);
double inner(const Tensor3& a, const Tensor3& b);

/// Three-way quadratic norm sqrt(<x ×1 q1 ×2 q2 ×3 q3, x>).
double qnorm3(const Tensor3& x, const Matrix& q1, const Matrix& q2, const Matrix& q3);

/// Gram matrix X_(mode) X_(mode)^T, computed without materializing the
/// unfolding.
Matrix mode_gram(const Tensor3& x, int mode);

/// Tensor file (.t3): header line `tensor3 n p q` followed by the values in
/// storage order. Values are written with 17 significant digits.
Tensor3 read_t3(const std::filesystem::path& path);
void write_t3(const std::filesystem::path& path, const Tensor3& x);

}  // namespace hopca
