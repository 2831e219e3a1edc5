// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Complexity drivers: cost-bound branches, MSE-targeted estimator sizing,
// cost-vs-accuracy sweeps, rate fits, and the coefficient/variance
// convergence study of SAOB,q against RE,q.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlblue/allocation.hpp"
#include "mlblue/blue.hpp"
#include "mlblue/model_family.hpp"

namespace mlblue {

enum class CostBranch { kBelow, kEqual, kAbove };

[[nodiscard]] const char* to_string(CostBranch b);

/// phi(eps) = eps^{first} + eps^{second} |log eps|^{log_power}.
struct CostBranchPrediction {
  double gamma_bias = 0;
  double gamma_var = 0;
  double gamma_cost = 0;
  CostBranch branch = CostBranch::kBelow;
  double first_exponent = 0;
  double second_exponent = 0;
  int log_power = 0;
  double value = 0;  // phi at the requested eps
};

[[nodiscard]] CostBranchPrediction predicted_cost_bound(double gamma_bias, double gamma_var,
                                                        double gamma_cost, double eps);

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // root mean square of the fit residuals
  double slope_stderr = 0;  // 0 when only two points are given
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 points and
/// distinct abscissae.
[[nodiscard]] RateFit fit_rate(std::span<const std::pair<double, double>> points);

enum class EstimatorKind { kMc, kMlmc, kRe, kWeightedRe, kSaob };
enum class BiasTarget { kUnitL, kReT };

[[nodiscard]] const char* to_string(EstimatorKind k);

/// An estimator family parametrized by the finest level L.
///
/// The bias vector is e_L (kUnitL) or v^{L,t} (kReT). Kinds: kMc uses
/// independent samples of every level in the bias support; kMlmc is the
/// weighted RE with s = 2; kRe couples `coupling` consecutive levels (s =
/// coupling); kWeightedRe takes s explicitly; kSaob optimizes over all groups
/// of size <= coupling (0 means L).
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kMlmc;
  int coupling = 0;
  BiasTarget bias = BiasTarget::kUnitL;
  int s = 2;
  int t = 2;
  std::string label;

  [[nodiscard]] std::string name() const;
  [[nodiscard]] int bias_order() const { return bias == BiasTarget::kUnitL ? 2 : t; }
};

/// alpha for the spec at finest level L.
[[nodiscard]] Vector bias_vector(const EstimatorSpec& spec, int levels, const RateVector& rates);

/// The fixed-coefficient scheme for non-SAOB kinds (unit sample counts).
[[nodiscard]] EstimatorScheme build_fixed_scheme(const EstimatorSpec& spec, int levels,
                                                 const RateVector& rates, const CostModel& cost);

struct SweepRecord {
  std::string estimator;
  double eps = 0;
  int levels = 0;
  double cost_continuous = 0;
  double cost_rounded = 0;
  double variance = 0;
  double bias_sq = 0;
  double mse = 0;
};

struct DriverOptions {
  int max_levels = 10;
  RoundingPolicy rounding = RoundingPolicy::kCeil;
  SolverOptions solver;
};

/// Cost of reaching a variance target with the estimator at finest level L.
struct LevelCost {
  double cost_continuous = 0;
  double cost_rounded = 0;
  double variance = 0;
  Allocation allocation;
};

[[nodiscard]] LevelCost cost_at_level(const EstimatorSpec& spec, const MomentData& moments,
                                      const RateVector& rates, const CostModel& cost,
                                      double target_variance, const DriverOptions& opts);

/// Picks the smallest L <= max_levels with bias^2 <= eps^2/2 and sizes the
/// estimator for variance eps^2/2. A mean-zero family uses L = max_levels
/// and variance eps^2.
[[nodiscard]] SweepRecord mse_target_driver(const ExpansionFamily& family, const CostModel& cost,
                                            const EstimatorSpec& spec, double eps,
                                            const DriverOptions& opts);

/// Reproduction mode: the finest level is given, eps = sqrt(2) |bias_L| and
/// the variance target equals bias_L^2.
[[nodiscard]] SweepRecord level_driver(const ExpansionFamily& family, const CostModel& cost,
                                       const EstimatorSpec& spec, int levels,
                                       const DriverOptions& opts);

struct SlopeRecord {
  std::string estimator;  // "<label>/continuous" or "<label>/rounded"
  double slope = 0;
  double slope_stderr = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SlopeRecord> slopes;
};

struct SweepPlan {
  enum class Mode { kGrid, kLevels } mode = Mode::kGrid;
  std::vector<double> eps_grid;
  int min_level = 1;
  int max_level = 1;
};

/// Runs every estimator over the plan. Slopes of log(cost) against log(eps)
/// are fitted per estimator when at least three records exist.
[[nodiscard]] SweepResult cost_sweep(const ExpansionFamily& family, const CostModel& cost,
                                     std::span<const EstimatorSpec> specs,
                                     const SweepPlan& plan, const DriverOptions& opts);

/// (sum_k ||beta_a^k - beta_b^k||^2)^{1/2} over the union of group
/// identities; a group present in only one scheme contributes its full norm.
[[nodiscard]] Real coefficient_distance(const EstimatorScheme& a, const EstimatorScheme& b);

struct ConvergencePoint {
  double ell0 = 0;
  int q = 0;
  double r = 0;  // coefficient distance SAOB,q vs RE,q
  double e = 0;  // (Var RE,q - Var SAOB,q) / Var SAOB,q
  Real var_re = 0;
  Real var_saob = 0;
};

/// SAOB,q against RE,q for the bias e_L (RE,q here is the weighted RE with
/// s = q, t = 2), both at optimal fractional allocations for the budget.
[[nodiscard]] ConvergencePoint convergence_point(const ExpansionFamily& family,
                                                 const CostModel& cost, int q, double budget,
                                                 const SolverOptions& opts = {});

[[nodiscard]] double coefficient_distance(const ExpansionFamily& family, const CostModel& cost,
                                          int q, double budget);
[[nodiscard]] double variance_gap(const ExpansionFamily& family, const CostModel& cost, int q,
                                  double budget);

/// All (ell0, q) combinations, ell0 outermost.
[[nodiscard]] std::vector<ConvergencePoint> convergence_study(
    const ExpansionFamily& family, const CostModel& cost, std::span<const double> ell0s,
    std::span<const int> qs, double budget, const SolverOptions& opts = {});

/// True when the sequence decreases except for at most `allowed` upward steps.
[[nodiscard]] bool decreasing_trend(std::span<const double> values, int allowed = 1);

}  // namespace mlblue
