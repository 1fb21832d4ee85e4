#include "hopca/bic.hpp"
#include "hopca/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hopca {

Vector soft_threshold(const Vector& x, double lam) {
  return x.unaryExpr([lam](double v) { return soft_threshold(v, lam); });
}

Vector positive_threshold(const Vector& x, double lam) {
  return x.unaryExpr([lam](double v) { return positive_threshold(v, lam); });
}

std::vector<double> log_grid(double lambda_max, int count, double ratio) {
  if (count < 1) throw Error("log_grid: count must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(count));
  if (count == 1) {
    g[0] = lambda_max;
    return g;
  }
  const double lo = std::log(ratio);
  for (int i = 0; i < count; ++i) {
    g[static_cast<std::size_t>(i)] = lambda_max * std::exp(lo * (1.0 - double(i) / (count - 1)));
  }
  g.back() = lambda_max;
  return g;
}

ModePenalty ModePenalty::bic(PenaltyKind kind) { return {kind, log_grid(1.0), true}; }

void ModePenalty::validate() const {
  if (!active()) return;
  if (lambdas.empty()) throw Error("penalty: lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) {
      throw Error("penalty: lambda must be finite and non-negative");
    }
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) {
      throw Error("penalty: lambda grid must be strictly increasing");
    }
  }
}

Vector ModePenalty::threshold(const Vector& c, double lam) const {
  switch (kind) {
    case PenaltyKind::none:
      return c;
    case PenaltyKind::lasso:
      return soft_threshold(c, lam);
    case PenaltyKind::nonneg_lasso:
      return positive_threshold(c, lam);
  }
  return c;
}

double ModePenalty::lambda_max(const Vector& c) const {
  if (c.size() == 0) return 0.0;
  if (kind == PenaltyKind::nonneg_lasso) return std::max(c.maxCoeff(), 0.0);
  return c.cwiseAbs().maxCoeff();
}

std::vector<double> ModePenalty::absolute_grid(const Vector& c) const {
  if (!active()) return {0.0};
  if (!relative) return lambdas;
  const double lmax = lambda_max(c);
  std::vector<double> g(lambdas.size());
  std::transform(lambdas.begin(), lambdas.end(), g.begin(), [lmax](double f) { return f * lmax; });
  return g;
}

// ---------------------------------------------------------------------------

double bic_value(double rss, double total_sq, double n_entries, Index nnz) {
  const double floor = std::numeric_limits<double>::epsilon() * total_sq;
  const double r = std::max({rss, floor, std::numeric_limits<double>::min()});
  return std::log(r / n_entries) + std::log(n_entries) / n_entries * static_cast<double>(nnz);
}

BicResult bic_select(double total_sq, double n_entries, const Vector& contraction,
                     std::span<const double> grid, PenaltyKind kind) {
  if (grid.empty()) throw Error("bic_select: empty lambda grid");
  ModePenalty rule{kind == PenaltyKind::none ? PenaltyKind::lasso : kind, {}, false};
  BicResult res;
  res.lambdas.assign(grid.begin(), grid.end());
  res.bic.reserve(grid.size());
  res.nnz.reserve(grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector t = rule.threshold(contraction, grid[i]);
    const double nrm = t.norm();
    Index nnz = 0;
    double rss = total_sq;
    if (nrm > 0.0) {
      nnz = (t.array() != 0.0).count();
      const double weight = t.dot(contraction) / nrm;
      rss = total_sq - weight * weight;
    }
    const double b = bic_value(rss, total_sq, n_entries, nnz);
    res.bic.push_back(b);
    res.nnz.push_back(nnz);
    // Ties resolve toward the larger (sparser) lambda.
    if (b <= best) {
      if (b < best || grid[i] > res.lambda) {
        best = b;
        res.index = i;
        res.lambda = grid[i];
      }
    }
  }
  return res;
}

BicResult bic_select(const Tensor3& residual, const Vector& a, const Vector& b, int mode,
                     std::span<const double> grid, PenaltyKind kind) {
  return bic_select(frob_norm_sq(residual), static_cast<double>(residual.size()),
                    contract_pair(residual, a, b, mode), grid, kind);
}

}  // namespace hopca
