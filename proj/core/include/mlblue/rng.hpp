// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Counter-based random numbers (Philox4x32-10). A stream is identified by a
// 64-bit seed and three 32-bit coordinates, so any draw can be recomputed in
// isolation and results do not depend on execution order or thread count.

#include <array>
#include <cstdint>
#include <span>

namespace mlblue {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block: a bijection of the counter under the key.
[[nodiscard]] PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Identifies an independent stream. `domain` separates unrelated uses of the
/// same seed (path records vs. simulation events).
struct StreamId {
  std::uint64_t seed = 0;
  std::uint16_t domain = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
};

inline constexpr std::uint16_t kDomainPathRecords = 1;
inline constexpr std::uint16_t kDomainSimulation = 2;

/// Standard normal variates from one stream, via Box-Muller on pairs of
/// 52-bit uniforms. Supports up to 2^16 blocks (2^17 normals) per stream.
class GaussianStream {
 public:
  explicit GaussianStream(const StreamId& id);

  double next();
  void fill(std::span<double> out);

 private:
  void refill();

  PhiloxKey key_{};
  StreamId id_;
  std::uint32_t block_ = 0;
  std::array<double, 2> buffer_{};
  int available_ = 0;
};

/// Uniform double in the open interval (0, 1) from a 64-bit word.
[[nodiscard]] inline double open_unit_interval(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace mlblue
