// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mlblue/rng.hpp"

namespace mlblue {
namespace {

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const PhiloxCounter out =
      philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(GaussianStream, SameIdSameSequence) {
  const StreamId id{42, kDomainSimulation, 1, 2, 3};
  GaussianStream a(id), b(id);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(GaussianStream, DistinctIdsDiffer) {
  GaussianStream a(StreamId{42, kDomainSimulation, 1, 2, 3});
  GaussianStream b(StreamId{42, kDomainSimulation, 1, 2, 4});
  GaussianStream c(StreamId{43, kDomainSimulation, 1, 2, 3});
  const double x = a.next();
  EXPECT_NE(x, b.next());
  EXPECT_NE(x, c.next());
}

TEST(GaussianStream, FillMatchesNext) {
  const StreamId id{5, kDomainPathRecords, 0, 0, 0};
  GaussianStream a(id), b(id);
  std::vector<double> buf(7);
  a.fill(buf);
  for (double x : buf) EXPECT_EQ(x, b.next());
}

TEST(GaussianStream, FirstMoments) {
  GaussianStream s(StreamId{9, kDomainSimulation, 0, 0, 0});
  const int n = 100000;
  double sum = 0, sq = 0, cube = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.next();
    sum += x;
    sq += x * x;
    cube += x * x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(cube / n, 0.0, 4.0 * std::sqrt(15.0 / n));
}

TEST(OpenUnitInterval, StaysInside) {
  EXPECT_GT(open_unit_interval(0), 0.0);
  EXPECT_LT(open_unit_interval(~std::uint64_t{0}), 1.0);
}

}  // namespace
}  // namespace mlblue
