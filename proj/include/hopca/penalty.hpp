#pragma once

#include <array>
#include <span>
#include <vector>

#include "hopca/tensor.hpp"

namespace hopca {

/// sign(x) * max(|x| - lam, 0).
inline double soft_threshold(double x, double lam) {
  const double a = (x < 0 ? -x : x) - lam;
  if (a <= 0.0) return 0.0;
  return x < 0 ? -a : a;
}

/// max(x - lam, 0).
inline double positive_threshold(double x, double lam) {
  const double a = x - lam;
  return a > 0.0 ? a : 0.0;
}

Vector soft_threshold(const Vector& x, double lam);
Vector positive_threshold(const Vector& x, double lam);

enum class PenaltyKind { none, lasso, nonneg_lasso };

/// Regularization for one mode. A single lambda is used as given; several
/// lambdas form a grid searched by BIC. When `relative` is set the values
/// are fractions of lambda_max, the smallest lambda that zeroes the update.
struct ModePenalty {
  PenaltyKind kind = PenaltyKind::none;
  std::vector<double> lambdas;
  bool relative = false;

  static ModePenalty none() { return {}; }
  static ModePenalty fixed(double lambda, PenaltyKind kind = PenaltyKind::lasso) {
    return {kind, {lambda}, false};
  }
  static ModePenalty fixed_relative(double fraction, PenaltyKind kind = PenaltyKind::lasso) {
    return {kind, {fraction}, true};
  }
  static ModePenalty grid(std::vector<double> values, PenaltyKind kind = PenaltyKind::lasso,
                          bool relative = false) {
    return {kind, std::move(values), relative};
  }
  /// Default BIC search: 50 log-spaced fractions from 1e-3 to 1 of lambda_max.
  static ModePenalty bic(PenaltyKind kind = PenaltyKind::lasso);

  [[nodiscard]] bool active() const noexcept { return kind != PenaltyKind::none; }
  [[nodiscard]] bool searches() const noexcept { return active() && lambdas.size() > 1; }
  void validate() const;

  /// Applies the thresholding rule of this penalty.
  [[nodiscard]] Vector threshold(const Vector& c, double lam) const;
  /// Smallest lambda for which threshold(c, lambda) is zero.
  [[nodiscard]] double lambda_max(const Vector& c) const;
  /// Absolute lambda values for contraction c.
  [[nodiscard]] std::vector<double> absolute_grid(const Vector& c) const;
};

/// Penalties for modes u, v, w.
using PenaltySpec = std::array<ModePenalty, 3>;

inline PenaltySpec no_penalty() { return {}; }

/// `count` log-spaced values from ratio*lambda_max up to lambda_max, increasing.
std::vector<double> log_grid(double lambda_max, int count = 50, double ratio = 1e-3);

}  // namespace hopca
