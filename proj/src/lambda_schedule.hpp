#pragma once

// Per-mode lambda bookkeeping shared by the sparse solvers.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hopca/penalty.hpp"

namespace hopca::detail {

/// Fixed lambdas are used as given; a relative fixed lambda is resolved at
/// the first update of its mode and then held. Searched modes pick lambda
/// at every update until two consecutive sweeps select the same grid
/// indices (or `max_search_sweeps` have passed); lambda is frozen after.
class LambdaSchedule {
 public:
  static constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

  LambdaSchedule(std::span<const ModePenalty> pens, int max_search_sweeps)
      : pens_(pens.begin(), pens.end()),
        lambda_(pens.size(), 0.0),
        resolved_(pens.size(), false),
        index_(pens.size(), kUnset),
        max_search_sweeps_(max_search_sweeps) {
    for (std::size_t m = 0; m < pens_.size(); ++m) {
      pens_[m].validate();
      if (pens_[m].searches()) searching_ = true;
      if (pens_[m].active() && !pens_[m].searches() && !pens_[m].relative) {
        lambda_[m] = pens_[m].lambdas.front();
        resolved_[m] = true;
      }
      if (!pens_[m].active()) resolved_[m] = true;
    }
  }

  /// Lambda for this update. `lmax` is lambda_max of the current update and
  /// `select` maps an absolute grid to the chosen index.
  double choose(std::size_t m, double lmax,
                const std::function<std::size_t(const std::vector<double>&)>& select) {
    const ModePenalty& p = pens_[m];
    if (!p.active()) return 0.0;
    if (p.searches() && searching_) {
      std::vector<double> grid = p.lambdas;
      if (p.relative) {
        for (double& g : grid) g *= lmax;
      }
      const std::size_t i = select(grid);
      if (i != index_[m]) changed_ = true;
      index_[m] = i;
      lambda_[m] = grid[i];
      resolved_[m] = true;
      return lambda_[m];
    }
    if (!resolved_[m]) {
      lambda_[m] = p.lambdas.front() * lmax;
      resolved_[m] = true;
    }
    return lambda_[m];
  }

  [[nodiscard]] bool searching() const { return searching_; }

  /// Closes a sweep. Returns true when the search has just been frozen.
  bool end_sweep() {
    if (!searching_) return false;
    ++sweeps_;
    const bool stable = !changed_ && sweeps_ > 1;
    changed_ = false;
    if (stable || sweeps_ >= max_search_sweeps_) {
      searching_ = false;
      return true;
    }
    return false;
  }

  [[nodiscard]] double lambda(std::size_t m) const { return lambda_[m]; }
  [[nodiscard]] const ModePenalty& penalty(std::size_t m) const { return pens_[m]; }

 private:
  std::vector<ModePenalty> pens_;
  std::vector<double> lambda_;
  std::vector<bool> resolved_;
  std::vector<std::size_t> index_;
  int max_search_sweeps_;
  int sweeps_ = 0;
  bool searching_ = false;
  bool changed_ = false;
};

}  // namespace hopca::detail
