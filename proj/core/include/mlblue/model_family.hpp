// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Parametric model families with a pathwise asymptotic expansion
//
//   Z_l = Z + sum_{j>=2} c_j 2^{-(l+l0) gamma_j} + s xi_l 2^{-(l+l0) r},
//
// where (Z, c_2, ..., c_q) ~ N(mean, Q) and the xi_l are independent standard
// normals. The moments are available in closed form, and coupled paths (all
// levels evaluated on one latent draw) can be sampled reproducibly.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlblue/real.hpp"

namespace mlblue {

/// Expansion rates 0 = gamma_1 < gamma_2 < ... < gamma_q and an optional cost
/// growth rate. Indexing is one-based to match the usual notation.
struct RateVector {
  std::vector<double> gammas;
  std::optional<double> gamma_cost;

  RateVector() = default;
  explicit RateVector(std::vector<double> g, std::optional<double> cost = std::nullopt);

  /// Throws InvalidArgument if an invariant is violated.
  void validate() const;

  [[nodiscard]] int size() const { return static_cast<int>(gammas.size()); }
  /// gamma_j, j in 1..size().
  [[nodiscard]] double gamma(int j) const;
};

/// Per-level evaluation cost w_l, either w0 2^{l gamma_cost} or a table.
class CostModel {
 public:
  enum class Mode { kGeometric, kTable };

  static CostModel geometric(double w0, double gamma_cost);
  static CostModel table(std::vector<double> costs);

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] double w0() const { return w0_; }
  [[nodiscard]] double gamma_cost() const { return gamma_cost_; }
  [[nodiscard]] const std::vector<double>& entries() const { return table_; }

  /// w_l for l >= 1 (and l <= table size in table mode).
  [[nodiscard]] double level_cost(int level) const;
  /// (w_1, ..., w_L).
  [[nodiscard]] std::vector<double> costs(int levels) const;

 private:
  CostModel() = default;
  Mode mode_ = Mode::kGeometric;
  double w0_ = 1.0;
  double gamma_cost_ = 1.0;
  std::vector<double> table_;
};

/// level_cost with an explicit level range check 1 <= level <= levels.
[[nodiscard]] double level_cost(const CostModel& cost, int level, int levels);

/// Exact moments of Z_1..Z_L and of the limit Z.
struct MomentData {
  Vector mu;
  Matrix C;
  Real truth_mean = 0;

  [[nodiscard]] int levels() const { return static_cast<int>(mu.size()); }
  /// Leading principal block (first `levels` models).
  [[nodiscard]] MomentData truncated(int levels) const;
};

class ExpansionFamily {
 public:
  /// kAllowSemidefinite admits singular Q for deterministic test families;
  /// family_moments still rejects such a family.
  enum class CovarianceCheck { kStrict, kAllowSemidefinite };

  ExpansionFamily(int levels, RateVector rates, Vector mean, Matrix q, double noise_scale,
                  double noise_rate, double ell0,
                  CovarianceCheck check = CovarianceCheck::kStrict);

  /// The four-level academic family: rates (0,1,2,3), Q_ij = exp(-|i-j|),
  /// zero mean, noise 0.1 2^{-3(l+l0)}.
  static ExpansionFamily toy(double ell0, int levels = 4);

  [[nodiscard]] int levels() const { return levels_; }
  [[nodiscard]] int order() const { return rates_.size(); }
  [[nodiscard]] const RateVector& rates() const { return rates_; }
  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Matrix& q() const { return q_; }
  [[nodiscard]] double noise_scale() const { return noise_scale_; }
  [[nodiscard]] double noise_rate() const { return noise_rate_; }
  [[nodiscard]] double ell0() const { return ell0_; }
  [[nodiscard]] bool q_is_spd() const { return q_spd_; }

  /// w_l = (2^{-(l+l0) gamma_j})_j, l in 1..levels().
  [[nodiscard]] Vector level_weights(int level) const;
  /// Standard deviation of the independent noise term at level l.
  [[nodiscard]] Real noise_sd(int level) const;

  [[nodiscard]] ExpansionFamily with_levels(int levels) const;
  [[nodiscard]] ExpansionFamily with_ell0(double ell0) const;
  [[nodiscard]] ExpansionFamily with_mean(Vector mean) const;

  /// F with F F^T = Q (Cholesky, or a symmetric square root when singular).
  [[nodiscard]] const Matrix& q_factor() const { return q_factor_; }

 private:
  int levels_;
  RateVector rates_;
  Vector mean_;
  Matrix q_;
  Matrix q_factor_;
  double noise_scale_;
  double noise_rate_;
  double ell0_;
  CovarianceCheck check_;
  bool q_spd_ = false;
};

/// Q_ij = exp(-|i-j|), the "toy-exp" preset.
[[nodiscard]] Matrix toy_exp_covariance(int n);

/// Closed-form moments. Throws InvalidArgument if Q is not SPD.
[[nodiscard]] MomentData family_moments(const ExpansionFamily& family);

/// One coupled event: the limit Z and Z_1..Z_L on the same latent draw.
struct PathRecord {
  double truth = 0;
  std::vector<double> levels;
};

/// Double-precision evaluator of coupled paths.
class PathSampler {
 public:
  explicit PathSampler(const ExpansionFamily& family);

  [[nodiscard]] int levels() const { return levels_; }
  /// Number of standard normals consumed per event.
  [[nodiscard]] int normals_per_event() const { return order_ + levels_; }

  /// Maps latent normals (size normals_per_event()) to Z_1..Z_L; returns Z.
  double evaluate(std::span<const double> normals, std::span<double> out) const;

 private:
  int levels_;
  int order_;
  VectorD mean_;
  MatrixD factor_;
  MatrixD weights_;  // levels x order
  VectorD noise_sd_;
};

/// n independent coupled records, record i drawn from the stream keyed on
/// (seed, i). Deterministic given the seed.
[[nodiscard]] std::vector<PathRecord> sample_paths(const ExpansionFamily& family,
                                                   std::uint64_t seed, std::size_t n);

}  // namespace mlblue
