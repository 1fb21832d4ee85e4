#include "hopca/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hopca/random.hpp"

namespace hopca {

namespace {

Vector sparse_column(Index n, double sparsity, Rng& rng) {
  const auto zeros = static_cast<Index>(std::llround(sparsity * static_cast<double>(n)));
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector col = Vector::Zero(n);
  for (std::size_t i = static_cast<std::size_t>(zeros); i < idx.size(); ++i) {
    double value = 0.0;
    while (value == 0.0) value = normal(rng);
    col[idx[i]] = value;
  }
  const double nrm = col.norm();
  if (nrm > 0.0) col /= nrm;
  return col;
}

Matrix sparse_factor(Index n, Index K, double sparsity, Rng& rng) {
  Matrix f(n, K);
  for (Index k = 0; k < K; ++k) f.col(k) = sparse_column(n, sparsity, rng);
  return f;
}

}  // namespace

void SimScenarioSpec::validate() const {
  if (scenario < 1 || scenario > 4) throw Error("scenario must be 1, 2, 3 or 4");
  if (K < 1) throw Error("simulation K must be >= 1");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw Error("sparsity must be in [0, 1)");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw Error("noise scale must be finite and >= 0");
  }
  const Dims d = dims();
  for (Index e : d) {
    if (e < K) throw DimensionError("every mode extent must be at least K");
  }
}

Dims SimScenarioSpec::dims() const {
  if (dims_override) return *dims_override;
  if (scenario == 2 || scenario == 4) return {1000, 20, 20};
  return {100, 100, 100};
}

Vector SimScenarioSpec::weights() const {
  Vector d(K);
  const double top = low_signal ? 100.0 : 200.0;
  if (K == 1) {
    d[0] = low_signal ? 50.0 : 100.0;
    return d;
  }
  // Weights halve from the first component to the second; later ones keep halving.
  for (Index k = 0; k < K; ++k) d[k] = top / std::pow(2.0, static_cast<double>(k));
  return d;
}

std::array<bool, 3> SimScenarioSpec::sparse_modes() const {
  if (scenario >= 3) return {true, true, true};
  return {true, false, false};
}

SupportMask support_of(const Matrix& f) { return f.array() != 0.0; }

SimTruth simulate(const SimScenarioSpec& spec) {
  spec.validate();
  const Dims dims = spec.dims();
  const Index K = spec.K;
  Rng factor_rng = make_rng(spec.seed, 2 * spec.replicate);
  Rng noise_rng = make_rng(spec.seed, 2 * spec.replicate + 1);

  SimTruth t;
  t.sparse_modes = spec.sparse_modes();
  std::array<Matrix, 3> f;
  for (std::size_t m = 0; m < 3; ++m) {
    if (t.sparse_modes[m]) f[m] = sparse_factor(dims[m], K, spec.sparsity, factor_rng);
  }
  if (!t.sparse_modes[1] || !t.sparse_modes[2]) {
    const Matrix g = randn(dims[1], dims[2], factor_rng);
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!t.sparse_modes[1]) f[1] = svd.matrixU().leftCols(K);
    if (!t.sparse_modes[2]) f[2] = svd.matrixV().leftCols(K);
  }
  if (!t.sparse_modes[0]) {
    const Matrix g = randn(dims[0], K, factor_rng);
    f[0] = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(dims[0], K);
  }
  t.model = {f[0], f[1], f[2], spec.weights()};
  for (std::size_t m = 0; m < 3; ++m) t.support[m] = support_of(f[m]);
  t.signal = t.model.reconstruct();
  t.x = t.signal;
  if (spec.noise_scale > 0.0) {
    const Matrix noise = randn(dims[0], dims[1] * dims[2], noise_rng);
    t.x.flat() += spec.noise_scale * noise.reshaped();
  }
  return t;
}

}  // namespace hopca
