#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "hopca/classic.hpp"

namespace hopca {

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Simulation scenarios 1-4: 1 and 3 are 100x100x100, 2 and 4 are
/// 1000x20x20. Scenarios 1 and 2 have sparse U only; 3 and 4 have sparse
/// U, V and W.
struct SimScenarioSpec {
  int scenario = 1;
  Index K = 1;
  bool low_signal = false;
  double sparsity = 0.5;  // fraction of zeros in each sparse factor column
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;  // selects independent RNG streams under one seed
  double noise_scale = 1.0;     // 0 gives the noiseless variant
  std::optional<Dims> dims_override;

  void validate() const;
  [[nodiscard]] Dims dims() const;
  /// K=1: 100 (low: 50). K=2: (200, 100) (low: (100, 50)).
  [[nodiscard]] Vector weights() const;
  [[nodiscard]] std::array<bool, 3> sparse_modes() const;
};

struct SimTruth {
  CpModel model;                     // unit factor columns and weights d
  std::array<SupportMask, 3> support;  // nonzero pattern of U, V, W
  std::array<bool, 3> sparse_modes{false, false, false};
  Tensor3 signal;                    // sum_k d_k u_k ∘ v_k ∘ w_k
  Tensor3 x;                         // signal + noise
};

/// Sparse factor columns have exactly round(sparsity * n) zeros at random
/// positions and N(0,1) nonzeros, then unit norm. Dense V and W are the
/// leading K left and right singular vectors of a p x q N(0,1) matrix; a
/// dense U (only when no mode is sparse) comes from an n x K Gaussian
/// matrix orthonormalized. Noise is i.i.d. N(0, noise_scale^2).
SimTruth simulate(const SimScenarioSpec& spec);

/// Nonzero pattern of every column of f.
SupportMask support_of(const Matrix& f);

}  // namespace hopca
