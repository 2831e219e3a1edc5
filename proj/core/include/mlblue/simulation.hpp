// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Monte Carlo execution of estimator schemes on coupled paths. Every event is
// drawn from its own counter-based stream keyed on (seed, replication, group,
// event), so results do not depend on the number of worker threads.

#include <cstdint>
#include <vector>

#include "mlblue/blue.hpp"
#include "mlblue/model_family.hpp"
#include "mlblue/rng.hpp"

namespace mlblue {

struct SimulationReport {
  std::size_t replications = 0;
  double mean_emp = 0;
  double var_emp = 0;
  double var_analytic = 0;
  double target = 0;  // alpha^T mu
  double truth = 0;   // E[Z]
  double z_score = 0;  // (mean_emp - target) / sqrt(var_analytic / R)
  double variance_ratio = 0;  // var_emp / var_analytic
  double mse_emp = 0;
  double mse_analytic = 0;  // bias^2 + var_analytic
  double mse_stderr = 0;
};

[[nodiscard]] inline StreamId event_stream(std::uint64_t seed, std::size_t replication,
                                           std::size_t group, std::size_t event) {
  return StreamId{seed, kDomainSimulation, static_cast<std::uint32_t>(event),
                  static_cast<std::uint32_t>(group), static_cast<std::uint32_t>(replication)};
}

/// One estimate per replication, in replication order.
[[nodiscard]] std::vector<double> replicate_estimates(const EstimatorScheme& scheme,
                                                      const ExpansionFamily& family,
                                                      std::uint64_t seed, std::size_t replications,
                                                      unsigned threads = 1);

/// Requires integer m_k and R >= 2. threads = 0 uses the hardware concurrency.
[[nodiscard]] SimulationReport run_estimator(const EstimatorScheme& scheme,
                                             const ExpansionFamily& family, std::uint64_t seed,
                                             std::size_t replications, unsigned threads = 1);

/// run_estimator, with the MSE fields as the quantity of interest.
[[nodiscard]] SimulationReport mse_report(const EstimatorScheme& scheme,
                                          const ExpansionFamily& family, std::uint64_t seed,
                                          std::size_t replications, unsigned threads = 1);

/// |mse_emp - mse_analytic| <= nsigma * mse_stderr.
[[nodiscard]] bool mse_consistent(const SimulationReport& report, double nsigma = 3.0);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

}  // namespace mlblue
