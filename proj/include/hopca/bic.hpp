#pragma once

#include <span>
#include <vector>

#include "hopca/penalty.hpp"
#include "hopca/tensor.hpp"

namespace hopca {

struct BicResult {
  double lambda = 0.0;
  std::size_t index = 0;
  std::vector<double> lambdas;
  std::vector<double> bic;
  std::vector<Index> nnz;
};

/// log(rss / N) + log(N) / N * nnz. rss is floored at machine precision
/// relative to `total_sq`, below which the subtraction carries no signal.
double bic_value(double rss, double total_sq, double n_entries, Index nnz);

/// BIC search for one factor update. `contraction` is the residual
/// contracted against the two fixed unit factors and `total_sq` is the
/// squared norm of that residual (N entries in total). For each lambda the
/// factor is thresholded and normalized, the implied weight is its inner
/// product with the contraction, and the rank-one fit gives rss = total_sq -
/// weight^2. Ties go to the larger lambda.
BicResult bic_select(double total_sq, double n_entries, const Vector& contraction,
                     std::span<const double> grid, PenaltyKind kind = PenaltyKind::lasso);

/// Same, forming the contraction of `residual` along the modes other than
/// `mode` with the fixed factors a and b (increasing mode order).
BicResult bic_select(const Tensor3& residual, const Vector& a, const Vector& b, int mode,
                     std::span<const double> grid, PenaltyKind kind = PenaltyKind::lasso);

}  // namespace hopca
