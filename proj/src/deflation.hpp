#pragma once

// Greedy deflation shared by the penalized rank-one solvers.

#include <numeric>
#include <string>

#include "hopca/sparse.hpp"

namespace hopca::detail {

inline Index count_nonzeros(const Vector& f) { return (f.array() != 0.0).count(); }

/// Fits K components with `solve(residual) -> SparseRankOne`, subtracting
/// d u∘v∘w after each. A zero component ends the deflation; it and all later
/// columns are zero-filled. Components are sorted by decreasing weight.
template <class Solve>
SparseCpFit greedy_deflation(const Tensor3& x, Index K, Solve&& solve) {
  SparseCpFit fit;
  fit.model = CpModel::zeros(x.dims(), K);
  Tensor3 residual = x;
  auto& diag = fit.diag;
  for (Index k = 0; k < K; ++k) {
    SparseRankOne r = solve(residual);
    const bool zero = r.d == 0.0 || r.u.norm() == 0.0 || r.v.norm() == 0.0 || r.w.norm() == 0.0;
    diag.iterations.push_back(r.iterations);
    diag.converged.push_back(r.converged);
    diag.final_objective.push_back(r.trace.empty() ? 0.0 : r.trace.back());
    diag.lambdas.push_back(r.lambdas);
    diag.fixed_from.push_back(r.fixed_from);
    diag.traces.push_back(std::move(r.trace));
    if (zero) {
      diag.nonzeros.push_back({0, 0, 0});
      diag.zero_filled = true;
      diag.note("component " + std::to_string(k + 1) +
                " thresholded to zero; remaining components zero-filled");
      for (Index j = k + 1; j < K; ++j) {
        diag.iterations.push_back(0);
        diag.converged.push_back(true);
        diag.final_objective.push_back(0.0);
        diag.traces.emplace_back();
        diag.lambdas.push_back(r.lambdas);
        diag.fixed_from.push_back(0);
        diag.nonzeros.push_back({0, 0, 0});
      }
      break;
    }
    diag.nonzeros.push_back({count_nonzeros(r.u), count_nonzeros(r.v), count_nonzeros(r.w)});
    fit.model.U.col(k) = r.u;
    fit.model.V.col(k) = r.v;
    fit.model.W.col(k) = r.w;
    fit.model.d[k] = r.d;
    add_outer3(residual, r.u, r.v, r.w, -r.d);
  }
  diag.computation_order.resize(static_cast<std::size_t>(K));
  std::iota(diag.computation_order.begin(), diag.computation_order.end(), 0);
  sort_and_canonicalize(fit.model, &diag);
  // Per-component records follow the returned column order.
  auto permute = [&](auto& vec) {
    auto copy = vec;
    for (std::size_t k = 0; k < vec.size(); ++k) {
      vec[k] = copy[static_cast<std::size_t>(diag.computation_order[k])];
    }
  };
  permute(diag.lambdas);
  permute(diag.nonzeros);
  return fit;
}

}  // namespace hopca::detail
