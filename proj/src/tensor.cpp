#include "hopca/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hopca {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw DimensionError("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

std::string dims_str(const Dims& d) {
  std::ostringstream os;
  os << d[0] << "x" << d[1] << "x" << d[2];
  return os.str();
}

using ConstSlice = Eigen::Map<const Matrix>;
using Slice = Eigen::Map<Matrix>;

// Frontal slice k of x as an n x p matrix.
ConstSlice frontal(const Tensor3& x, Index k) {
  return {x.data() + x.n() * x.p() * k, x.n(), x.p()};
}
Slice frontal(Tensor3& x, Index k) { return {x.data() + x.n() * x.p() * k, x.n(), x.p()}; }

}  // namespace

Tensor3::Tensor3(Index n, Index p, Index q) : dims_{n, p, q} {
  if (n <= 0 || p <= 0 || q <= 0) {
    throw DimensionError("tensor extents must be positive, got " + dims_str(dims_));
  }
  values_.assign(static_cast<std::size_t>(n * p * q), 0.0);
}

Tensor3::Tensor3(const Dims& dims, std::vector<double> values) : dims_(dims) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw DimensionError("tensor extents must be positive, got " + dims_str(dims));
  }
  if (values.size() != static_cast<std::size_t>(dims[0] * dims[1] * dims[2])) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match dims " + dims_str(dims));
  }
  values_ = std::move(values);
  if (!all_finite()) throw NumericalError("tensor contains NaN or Inf");
}

bool Tensor3::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  if (dims_ != other.dims_) throw DimensionError("tensor dims differ");
  flat() += other.flat();
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  if (dims_ != other.dims_) throw DimensionError("tensor dims differ");
  flat() -= other.flat();
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  flat() *= s;
  return *this;
}

Matrix matricize(const Tensor3& x, int mode) {
  check_mode(mode);
  const Index n = x.n(), p = x.p(), q = x.q();
  switch (mode) {
    case 1:
      return Eigen::Map<const Matrix>(x.data(), n, p * q);
    case 2: {
      Matrix m(p, n * q);
      for (Index k = 0; k < q; ++k) m.middleCols(n * k, n) = frontal(x, k).transpose();
      return m;
    }
    default:
      return Eigen::Map<const Matrix>(x.data(), n * p, q).transpose();
  }
}

Tensor3 fold(const Matrix& m, int mode, const Dims& dims) {
  check_mode(mode);
  const Index n = dims[0], p = dims[1], q = dims[2];
  const Index rows = dims[mode - 1];
  const Index cols = n * p * q / rows;
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError("cannot fold a " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix along mode " +
                         std::to_string(mode) + " into " + dims_str(dims));
  }
  if (!m.allFinite()) throw NumericalError("matrix contains NaN or Inf");
  Tensor3 x(dims);
  switch (mode) {
    case 1:
      Eigen::Map<Matrix>(x.data(), n, p * q) = m;
      break;
    case 2:
      for (Index k = 0; k < q; ++k) frontal(x, k) = m.middleCols(n * k, n).transpose();
      break;
    default:
      Eigen::Map<Matrix>(x.data(), n * p, q) = m.transpose();
  }
  return x;
}

Tensor3 mode_mult(const Tensor3& x, const Matrix& m, int mode) {
  check_mode(mode);
  if (m.cols() != x.dim(mode)) {
    throw DimensionError("mode_mult: matrix has " + std::to_string(m.cols()) +
                         " columns but mode " + std::to_string(mode) + " has extent " +
                         std::to_string(x.dim(mode)));
  }
  const Index n = x.n(), p = x.p(), q = x.q();
  Dims out_dims = x.dims();
  out_dims[mode - 1] = m.rows();
  Tensor3 out(out_dims);
  switch (mode) {
    case 1:
      Eigen::Map<Matrix>(out.data(), m.rows(), p * q).noalias() =
          m * Eigen::Map<const Matrix>(x.data(), n, p * q);
      break;
    case 2:
      for (Index k = 0; k < q; ++k) frontal(out, k).noalias() = frontal(x, k) * m.transpose();
      break;
    default:
      Eigen::Map<Matrix>(out.data(), n * p, m.rows()).noalias() =
          Eigen::Map<const Matrix>(x.data(), n * p, q) * m.transpose();
  }
  return out;
}

Matrix contract_vec(const Tensor3& x, const Vector& v, int mode) {
  check_mode(mode);
  if (v.size() != x.dim(mode)) {
    throw DimensionError("contract_vec: vector length " + std::to_string(v.size()) +
                         " does not match mode " + std::to_string(mode) + " extent " +
                         std::to_string(x.dim(mode)));
  }
  const Index n = x.n(), p = x.p(), q = x.q();
  switch (mode) {
    case 1:
      // (v^T X_(1)) reshaped to p x q.
      {
        const Eigen::RowVectorXd r = v.transpose() * Eigen::Map<const Matrix>(x.data(), n, p * q);
        return r.reshaped(p, q);
      }
    case 2: {
      Matrix out(n, q);
      for (Index k = 0; k < q; ++k) out.col(k).noalias() = frontal(x, k) * v;
      return out;
    }
    default:
      {
        const Vector r = Eigen::Map<const Matrix>(x.data(), n * p, q) * v;
        return r.reshaped(n, p);
      }
  }
}

Vector contract_pair(const Tensor3& x, const Vector& a, const Vector& b, int free_mode) {
  check_mode(free_mode);
  const Index n = x.n(), p = x.p(), q = x.q();
  const Index a_len = free_mode == 1 ? p : n;
  const Index b_len = free_mode == 3 ? p : q;
  if (a.size() != a_len || b.size() != b_len) {
    throw DimensionError("contract_pair: vector lengths do not match tensor dims");
  }
  switch (free_mode) {
    case 1: {
      // Sum over k of b_k * S_k a.
      Vector out = Vector::Zero(n);
      Vector tmp(n);
      for (Index k = 0; k < q; ++k) {
        if (b[k] == 0.0) continue;
        tmp.noalias() = frontal(x, k) * a;
        out += b[k] * tmp;
      }
      return out;
    }
    case 2: {
      Vector out = Vector::Zero(p);
      Vector tmp(p);
      for (Index k = 0; k < q; ++k) {
        if (b[k] == 0.0) continue;
        tmp.noalias() = frontal(x, k).transpose() * a;
        out += b[k] * tmp;
      }
      return out;
    }
    default: {
      Vector out(q);
      Vector tmp(n);
      for (Index k = 0; k < q; ++k) {
        tmp.noalias() = frontal(x, k) * b;
        out[k] = a.dot(tmp);
      }
      return out;
    }
  }
}

double contract_all(const Tensor3& x, const Vector& u, const Vector& v, const Vector& w) {
  if (u.size() != x.n()) throw DimensionError("contract_all: u length mismatch");
  return u.dot(contract_pair(x, v, w, 1));
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index k = 0; k < a.cols(); ++k) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
    }
  }
  return out;
}

Tensor3 outer3(const Vector& u, const Vector& v, const Vector& w, double d) {
  Tensor3 x(u.size(), v.size(), w.size());
  add_outer3(x, u, v, w, d);
  return x;
}

void add_outer3(Tensor3& x, const Vector& u, const Vector& v, const Vector& w, double scale) {
  if (u.size() != x.n() || v.size() != x.p() || w.size() != x.q()) {
    throw DimensionError("add_outer3: factor lengths do not match tensor dims");
  }
  if (scale == 0.0) return;
  const Matrix uv = scale * u * v.transpose();
  for (Index k = 0; k < x.q(); ++k) {
    if (w[k] != 0.0) frontal(x, k) += w[k] * uv;
  }
}

double frob_norm_sq(const Tensor3& x) { return x.flat().squaredNorm(); }

double frob_norm(const Tensor3& x) { return x.flat().norm(); }

double inner(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner: tensor dims differ");
  return a.flat().dot(b.flat());
}

double qnorm3(const Tensor3& x, const Matrix& q1, const Matrix& q2, const Matrix& q3) {
  const std::array<const Matrix*, 3> qs{&q1, &q2, &q3};
  for (int m = 0; m < 3; ++m) {
    const Index d = x.dims()[m];
    if (qs[m]->rows() != d || qs[m]->cols() != d) {
      throw DimensionError("qnorm3: operator " + std::to_string(m + 1) + " must be " +
                           std::to_string(d) + "x" + std::to_string(d));
    }
  }
  const Tensor3 xt = mode_mult(mode_mult(mode_mult(x, q1, 1), q2, 2), q3, 3);
  const double value = inner(xt, x);
  const double scale = frob_norm_sq(x) * q1.norm() * q2.norm() * q3.norm();
  if (value < -1e-12 * scale) {
    throw NumericalError("qnorm3: negative quadratic form; operators are not PSD");
  }
  return std::sqrt(std::max(value, 0.0));
}

Matrix mode_gram(const Tensor3& x, int mode) {
  check_mode(mode);
  const Index n = x.n(), p = x.p(), q = x.q();
  switch (mode) {
    case 1: {
      Eigen::Map<const Matrix> a(x.data(), n, p * q);
      Matrix g = Matrix::Zero(n, n);
      g.selfadjointView<Eigen::Lower>().rankUpdate(a);
      return g.selfadjointView<Eigen::Lower>();
    }
    case 2: {
      Matrix g = Matrix::Zero(p, p);
      for (Index k = 0; k < q; ++k) g.selfadjointView<Eigen::Lower>().rankUpdate(frontal(x, k).transpose());
      return g.selfadjointView<Eigen::Lower>();
    }
    default: {
      Eigen::Map<const Matrix> a(x.data(), n * p, q);
      Matrix g = Matrix::Zero(q, q);
      g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
      return g.selfadjointView<Eigen::Lower>();
    }
  }
}

Tensor3 read_t3(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tensor file " + path.string());
  std::string tag;
  Index n = 0, p = 0, q = 0;
  if (!(in >> tag >> n >> p >> q) || tag != "tensor3") {
    throw IoError("malformed tensor header in " + path.string());
  }
  if (n <= 0 || p <= 0 || q <= 0) throw IoError("non-positive dims in " + path.string());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * p * q));
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
      throw IoError("unparseable value '" + token + "' in " + path.string());
    }
    values.push_back(v);
  }
  if (values.size() != static_cast<std::size_t>(n * p * q)) {
    throw IoError("expected " + std::to_string(n * p * q) + " values in " + path.string() +
                  ", found " + std::to_string(values.size()));
  }
  return Tensor3({n, p, q}, std::move(values));
}

void write_t3(const std::filesystem::path& path, const Tensor3& x) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write tensor file " + path.string());
  out << "tensor3 " << x.n() << ' ' << x.p() << ' ' << x.q() << '\n';
  out << std::setprecision(17);
  const auto vals = x.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out << vals[i] << ((i + 1) % static_cast<std::size_t>(x.n()) == 0 ? '\n' : ' ');
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hopca
