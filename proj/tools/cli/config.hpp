// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlblue/allocation.hpp"
#include "mlblue/analysis.hpp"
#include "mlblue/model_family.hpp"

namespace mlblue::cli {

/// Schema violation at a dotted field path (e.g. "family.rates").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : std::runtime_error(msg), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RunParameters {
  std::optional<double> budget;
  std::optional<double> eps;
  std::vector<double> eps_grid;
  SweepPlan::Mode sweep_mode = SweepPlan::Mode::kGrid;
  int min_level = 1;
  int max_level = 0;  // 0: family levels
  int max_levels = 0;  // 0: family levels
  std::uint64_t seed = 1;
  std::size_t replications = 1000;
  RoundingPolicy rounding = RoundingPolicy::kCeil;
  std::vector<double> ell0s{0, 1, 2, 3, 4, 5, 6};
  std::vector<int> couplings;
  unsigned threads = 1;
};

struct RunConfig {
  ExpansionFamily family;
  CostModel cost;
  std::vector<EstimatorSpec> estimators;
  RunParameters run;
};

[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::string& path);

}  // namespace mlblue::cli
