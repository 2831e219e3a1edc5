// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlblue {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = round(counter, key);
  }
  return counter;
}

GaussianStream::GaussianStream(const StreamId& id)
    : key_{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)}, id_(id) {}

void GaussianStream::refill() {
  if (block_ > 0xFFFFu) throw std::out_of_range("GaussianStream: stream exhausted");
  const PhiloxCounter ctr{(static_cast<std::uint32_t>(id_.domain) << 16) | block_, id_.a, id_.b, id_.c};
  ++block_;
  const PhiloxCounter r = philox4x32(ctr, key_);
  const double u1 = open_unit_interval((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
  const double u2 = open_unit_interval((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  buffer_ = {radius * std::cos(angle), radius * std::sin(angle)};
  available_ = 2;
}

double GaussianStream::next() {
  if (available_ == 0) refill();
  return buffer_[static_cast<std::size_t>(2 - available_--)];
}

void GaussianStream::fill(std::span<double> out) {
  for (double& x : out) x = next();
}

}  // namespace mlblue
