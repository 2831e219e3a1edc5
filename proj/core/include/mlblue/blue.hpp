// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Best linear unbiased estimation on a block design of model groups.
//
//   Psi(m) = sum_k m_k P^k (C^k)^{-1} R^k,   y(m) = sum_k P^k (C^k)^{-1} sum_i Z^k_i,
//
// with the estimate alpha^T mu_hat, Psi mu_hat = y, and variance
// alpha^T Psi^{-1} alpha.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlblue/groups.hpp"
#include "mlblue/real.hpp"

namespace mlblue {

/// Groups whose principal submatrix has a condition estimate above this are
/// flagged as near-singular (still usable).
inline constexpr double kNearSingularCondition = 1e12;

/// Per-group sample counts with the cost they consume.
struct Allocation {
  std::vector<double> m;
  double cost = 0;
};

/// Consumed cost sum_k m_k W_k.
[[nodiscard]] double allocation_cost(std::span<const double> m, std::span<const double> costs);

/// Inverses of the group submatrices C^k, factored once and shared by all
/// evaluations of Psi.
class GroupCovariance {
 public:
  GroupCovariance(const GroupSystem& system, const Matrix& c);

  [[nodiscard]] const GroupSystem& system() const { return system_; }
  [[nodiscard]] const Matrix& covariance() const { return c_; }
  [[nodiscard]] int levels() const { return system_.levels(); }
  [[nodiscard]] std::size_t size() const { return system_.size(); }

  /// (C^k)^{-1}, |S^k| x |S^k|.
  [[nodiscard]] const Matrix& inverse(std::size_t k) const { return inverses_.at(k); }
  /// Condition estimate of C^k.
  [[nodiscard]] Real condition(std::size_t k) const { return conditions_.at(k); }
  /// Groups with condition above kNearSingularCondition.
  [[nodiscard]] const std::vector<std::size_t>& near_singular() const { return near_singular_; }

  /// Psi(w) = sum_k w_k P^k (C^k)^{-1} R^k for arbitrary nonnegative weights.
  [[nodiscard]] Matrix psi(std::span<const Real> weights) const;
  [[nodiscard]] Matrix psi(std::span<const double> m) const;

  /// (R^k x)^T (C^k)^{-1} (R^k x).
  [[nodiscard]] Real quadratic(std::size_t k, const Vector& x) const;
  /// P^k (C^k)^{-1} R^k x.
  [[nodiscard]] Vector apply(std::size_t k, const Vector& x) const;

 private:
  GroupSystem system_;
  Matrix c_;
  std::vector<Matrix> inverses_;
  std::vector<Real> conditions_;
  std::vector<std::size_t> near_singular_;
};

/// Psi(m). Throws NumericalError naming the group if some C^k is singular.
[[nodiscard]] Matrix assemble_psi(const GroupSystem& system, const Matrix& c,
                                  std::span<const double> m);

/// alpha^T Psi^{-1} alpha through a Cholesky solve. Levels that no sampled
/// group touches are dropped; alpha must not weight them (NumericalError).
[[nodiscard]] Real blue_variance(const Matrix& psi, const Vector& alpha);

/// Evaluations of one group: one row per event, one column per model of S^k.
using GroupSamples = MatrixD;

/// alpha^T mu_hat with Psi(m) mu_hat = y(m), where m_k is the row count of
/// samples[k].
[[nodiscard]] Real blue_point_estimate(const GroupSystem& system, const Matrix& c,
                                       std::span<const GroupSamples> samples,
                                       const Vector& alpha);

/// beta^k = m_k P^k (C^k)^{-1} R^k Psi(m)^{-1} alpha.
[[nodiscard]] std::vector<Vector> extract_beta(const GroupSystem& system, const Matrix& c,
                                               std::span<const double> m, const Vector& alpha);
[[nodiscard]] std::vector<Vector> extract_beta(const GroupCovariance& gc,
                                               std::span<const double> m, const Vector& alpha);

/// A linear unbiased estimator sum_k (1/m_k) sum_i (beta^k)^T Z(omega^k_i).
struct EstimatorScheme {
  std::string name;
  GroupSystem system;
  std::vector<Vector> betas;  // each of length L, supported on S^k
  std::vector<double> m;
  Vector alpha;
  /// Free-form annotations exported with the scheme (e.g. conjectural bounds).
  std::vector<std::string> notes;
};

/// sum_k (1/m_k) beta^k^T C beta^k. Throws InvalidArgument if beta^k != 0
/// while m_k = 0.
[[nodiscard]] Real scheme_variance(const EstimatorScheme& scheme, const Matrix& c);

/// sigma_k^2 = beta^k^T C beta^k for every group.
[[nodiscard]] std::vector<Real> group_variances(const EstimatorScheme& scheme, const Matrix& c);

/// sum_k m_k W_k with the system's group costs.
[[nodiscard]] double scheme_cost(const EstimatorScheme& scheme);
/// sum_k m_k W_k with W_k recomputed from a cost model.
[[nodiscard]] double scheme_cost(const EstimatorScheme& scheme, const CostModel& cost);

struct UnbiasedCheck {
  bool ok = true;
  double residual = 0;  // ||sum_k beta^k - alpha||_inf
  std::vector<std::string> violations;
};

/// Verifies sum_k beta^k = alpha (to tol relative to ||alpha||_inf), the
/// support condition and beta^k = 0 wherever m_k = 0.
[[nodiscard]] UnbiasedCheck check_unbiased(const EstimatorScheme& scheme, double tol = 1e-10);

}  // namespace mlblue
