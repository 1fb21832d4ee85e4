#pragma once

#include <array>
#include <string>
#include <vector>

#include "hopca/classic.hpp"
#include "hopca/simulation.hpp"

namespace hopca {

struct VarianceReport {
  std::vector<double> cumulative;  // entry k-1 uses the first k components
  // Projection matrices (U, V, W) for each k, kept only on request.
  std::vector<std::array<Matrix, 3>> projections;
};

/// Orthogonal projection onto span(a): a (a^T a)^+ a^T, with eigenvalues of
/// a^T a below 1e-12 times the largest treated as zero.
Matrix projection_matrix(const Matrix& a);

/// Cumulative proportion of variance explained by the first k factor
/// columns of each mode, k = 1..upto_k. Modes with fewer columns use all.
VarianceReport variance_explained(const Tensor3& x, const Matrix& U, const Matrix& V,
                                  const Matrix& W, Index upto_k, bool keep_projections = false);

VarianceReport variance_explained(const Tensor3& x, const CpModel& model, Index upto_k,
                                  bool keep_projections = false);

/// Variance explained by component k alone.
double component_variance(const Tensor3& x, const CpModel& model, Index k);

struct RecoveryMetrics {
  // Indexed by true component, then mode.
  std::vector<std::array<double, 3>> tp;
  std::vector<std::array<double, 3>> fp;
  // For CP models: estimated column paired with each true component (-1 if
  // none) and the sign of the cosine per mode. Tucker models pair each mode
  // separately.
  std::vector<std::array<Index, 3>> matched;
  std::vector<std::array<double, 3>> signs;
  double mse = 0.0;
  bool k_mismatch = false;
};

/// TP = correctly nonzero / truly nonzero, FP = falsely nonzero / truly
/// zero (0 when no entry is truly zero) for one pair of columns.
std::pair<double, double> support_rates(const Vector& estimate, const SupportMask& truth_col);
std::pair<double, double> support_rates(const Vector& estimate, const Vector& truth);

/// Greedy matching on the product of |cosines| over the three modes.
RecoveryMetrics support_metrics(const CpModel& estimated, const SimTruth& truth);

/// Per-mode greedy |cosine| matching of factor columns.
RecoveryMetrics support_metrics(const TuckerModel& estimated, const SimTruth& truth);

/// ||xhat - signal||^2 / (npq).
double signal_mse(const Tensor3& xhat, const SimTruth& truth);
double signal_mse(const CpModel& estimated, const SimTruth& truth);

/// Zeroes entries of each column with |entry| <= fraction * max |entry|
/// (strictly below for fraction 0, so nonzeros survive).
Matrix naive_threshold(const Matrix& f, double fraction);

struct RocPoint {
  std::size_t grid_index = 0;
  double lambda = 0.0;  // relative lambda fraction (or threshold fraction)
  Index component = 0;
  int mode = 1;
  double tp = 0.0;
  double fp = 0.0;
};

/// Methods: sparse-cp-tpa, sparse-cp-als, sparse-hosvd, sparse-hooi, and the
/// baselines naive-cp and naive-tucker. `grid` holds relative lambda
/// fractions (threshold fractions for the baselines), increasing. The
/// sparse modes of the truth are penalized; points are emitted for each
/// true component and sparse mode.
std::vector<RocPoint> roc_sweep(const Tensor3& x, const SimTruth& truth, const std::string& method,
                                const std::vector<double>& grid, const SolverConfig& cfg = {});

/// Default ROC grid: 21 evenly spaced fractions from 0 to 1.
std::vector<double> default_roc_grid();

}  // namespace hopca
