// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sample allocation: the closed-form optimum for fixed coefficients and the
// convex allocation problem behind the SAOB,
//
//   minimize alpha^T Psi(m)^{-1} alpha  s.t.  sum_k m_k W_k = p,  m >= 0.
//
// The solver works on budget fractions b_k = m_k W_k / p, which live on the
// unit simplex and do not depend on p.

#include <span>
#include <vector>

#include "mlblue/blue.hpp"
#include "mlblue/error.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/real.hpp"

namespace mlblue {

struct SolverOptions {
  int max_iters = 10000;
  /// Relative objective improvement below which the iteration stalls out.
  double rel_tol = 1e-12;
  /// Groups with m_k < activity * p / W_k are dropped at the end.
  double activity = 1e-8;
  /// Bound on the scaled KKT residual accepted as converged.
  double kkt_tol = 1e-9;
};

struct ClosedFormResult {
  Allocation allocation;
  Real objective = 0;  // J(m*) = (sum_k sqrt(sigma_k^2 W_k))^2 / p
};

/// m*_k = p sqrt(sigma_k^2 / W_k) / sum_j sqrt(sigma_j^2 W_j).
[[nodiscard]] ClosedFormResult closed_form_allocation(std::span<const Real> sigma2,
                                                      std::span<const double> costs, double p);

struct SaobResult {
  Allocation allocation;       // continuous m_k
  std::vector<double> fractions;  // b_k = m_k W_k / p
  Real variance = 0;
  /// Variance of the MLMC-style initial allocation, when that exists.
  Real init_variance = 0;
  int iterations = 0;
  /// max over groups of the violation of d_k / F = 1 (active) or <= 1 (inactive),
  /// d_k = -dF/db_k and F = p Var.
  double kkt_residual = 0;
};

/// Thrown when the iteration limit is hit; carries the best iterate.
class SaobNotConverged : public NumericalError {
 public:
  SaobNotConverged(const std::string& what, SaobResult best)
      : NumericalError(what), best_(std::move(best)) {}
  [[nodiscard]] const SaobResult& best() const { return best_; }

 private:
  SaobResult best_;
};

[[nodiscard]] SaobResult saob_allocate(const GroupCovariance& gc, const Vector& alpha, double p,
                                       const SolverOptions& opts = {});
[[nodiscard]] SaobResult saob_allocate(const GroupSystem& system, const Matrix& c,
                                       const Vector& alpha, double p,
                                       const SolverOptions& opts = {});

/// The SAOB as an explicit scheme: extract_beta at the optimal allocation.
[[nodiscard]] EstimatorScheme saob_scheme(const GroupCovariance& gc, const Vector& alpha,
                                          const SaobResult& result);

enum class RoundingPolicy { kCeil, kNone };

/// kCeil: m_k -> ceil(m_k) when m_k > threshold, else 0. kNone: unchanged.
[[nodiscard]] Allocation round_allocation(const Allocation& alloc, std::span<const double> costs,
                                          RoundingPolicy policy, double threshold = 1e-8);

struct BudgetResult {
  double budget = 0;
  SaobResult solve;
};

/// Budget p at which the SAOB reaches the target variance (solve at p = 1,
/// then scale).
[[nodiscard]] BudgetResult budget_for_variance(const GroupCovariance& gc, const Vector& alpha,
                                               double target_variance,
                                               const SolverOptions& opts = {});
[[nodiscard]] BudgetResult budget_for_variance(const GroupSystem& system, const Matrix& c,
                                               const Vector& alpha, double target_variance,
                                               const SolverOptions& opts = {});

/// Fixed-coefficient scheme with its sample counts replaced by the
/// closed-form optimum at budget p.
[[nodiscard]] EstimatorScheme allocate_scheme(const EstimatorScheme& scheme, const Matrix& c,
                                              double p);
/// Budget at which the closed-form allocation of a scheme reaches the target.
[[nodiscard]] double scheme_budget_for_variance(const EstimatorScheme& scheme, const Matrix& c,
                                                double target_variance);

}  // namespace mlblue
