// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace mlblue::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitInfeasible = 3;

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream* log = nullptr;  // warnings; may be null
};

// Each command writes its CSV files into ctx.out_dir and returns their paths.
std::vector<std::filesystem::path> cmd_moments(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_allocate(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_schemes(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_sweep(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_convergence(const CommandContext& ctx);
std::vector<std::filesystem::path> cmd_simulate(const CommandContext& ctx);

/// Full command-line entry point: parses flags, runs the command, and maps
/// failures to exit codes with a one-line tag on `err`:
///   mlblue: error=<config|numerical|infeasible|usage> path=<field> msg="..."
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlblue::cli
