// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/Cholesky>

#include <gtest/gtest.h>

#include "mlblue/error.hpp"
#include "mlblue/model_family.hpp"

namespace mlblue {
namespace {

ExpansionFamily identity_family() {
  return ExpansionFamily(4, RateVector({0, 1, 2, 3}), Vector::Zero(4), Matrix::Identity(4, 4), 0.1,
                         3, 0);
}

// Hand evaluation of the covariance of the expansion with Q = I.
double identity_cov(int l, int k) {
  double c = 0;
  for (int j = 0; j < 4; ++j) c += std::exp2(-l * j) * std::exp2(-k * j);
  if (l == k) c += 0.01 * std::exp2(-6.0 * l);
  return c;
}

TEST(FamilyMoments, IdentityCovarianceValues) {
  const MomentData m = family_moments(identity_family());
  EXPECT_DOUBLE_EQ(to_double(m.C(0, 0)), 1.32828125);
  EXPECT_DOUBLE_EQ(to_double(m.C(0, 1)), 1.142578125);
  for (int l = 1; l <= 4; ++l)
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(to_double(m.C(l - 1, k - 1)), identity_cov(l, k), 1e-15);
}

TEST(FamilyMoments, MeanZero) {
  const MomentData m = family_moments(ExpansionFamily::toy(0));
  EXPECT_EQ(m.truth_mean, 0);
  for (int l = 0; l < 4; ++l) EXPECT_EQ(m.mu(l), 0);
}

TEST(FamilyMoments, CovarianceIsSymmetricPositiveDefinite) {
  for (double ell0 : {0.0, 3.0, 6.0}) {
    const MomentData m = family_moments(ExpansionFamily::toy(ell0));
    EXPECT_TRUE(m.C == Matrix(m.C.transpose()));
    Eigen::LLT<Matrix> llt(m.C);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
}

TEST(FamilyMoments, Truncation) {
  const MomentData m = family_moments(ExpansionFamily::toy(1, 4));
  const MomentData m3 = family_moments(ExpansionFamily::toy(1, 3));
  EXPECT_EQ(m.truncated(3).C, m3.C);
}

TEST(Family, RejectsBadRates) {
  EXPECT_THROW(RateVector({0, 2, 1}).validate(), InvalidArgument);
  EXPECT_THROW(RateVector({1, 2}).validate(), InvalidArgument);
  EXPECT_THROW(RateVector(std::vector<double>{}).validate(), InvalidArgument);
  EXPECT_NO_THROW(RateVector({0, 2, 4}).validate());
}

TEST(Family, RejectsIndefiniteQ) {
  Matrix q = Matrix::Identity(2, 2);
  q(0, 1) = q(1, 0) = 2;
  EXPECT_THROW(ExpansionFamily(2, RateVector({0, 1}), Vector::Zero(2), q, 0, 0, 0), InvalidArgument);
}

TEST(PathSampler, DeterministicFamily) {
  Vector mean(3);
  mean << 1.5, -2.0, 0.5;
  const ExpansionFamily f(3, RateVector({0, 1, 2}), mean, Matrix::Zero(3, 3), 0.0, 0.0, 0.0,
                          ExpansionFamily::CovarianceCheck::kAllowSemidefinite);
  EXPECT_THROW((void)family_moments(f), InvalidArgument);
  for (const PathRecord& r : sample_paths(f, 3, 5)) {
    EXPECT_EQ(r.truth, 1.5);
    for (int l = 1; l <= 3; ++l) {
      const double expect = to_double(f.level_weights(l).dot(mean));
      EXPECT_DOUBLE_EQ(r.levels[static_cast<std::size_t>(l - 1)], expect);
    }
  }
}

TEST(PathSampler, SameSeedSameRecords) {
  const ExpansionFamily f = ExpansionFamily::toy(0);
  const auto a = sample_paths(f, 11, 50);
  const auto b = sample_paths(f, 11, 50);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].truth, b[i].truth);
    EXPECT_EQ(a[i].levels, b[i].levels);
  }
  EXPECT_NE(sample_paths(f, 12, 1)[0].levels, a[0].levels);
}

TEST(PathSampler, MonteCarloMomentsAgree) {
  Vector mean(4);
  mean << 1, 0.5, -1, 2;
  const ExpansionFamily f = identity_family().with_mean(mean);
  const MomentData m = family_moments(f);
  const std::size_t n = 1000000;
  const auto paths = sample_paths(f, 2024, n);
  double s1 = 0, s11 = 0, s12 = 0, s2 = 0, truth = 0;
  for (const PathRecord& r : paths) {
    s1 += r.levels[0];
    s2 += r.levels[1];
    truth += r.truth;
  }
  const double m1 = s1 / n, m2 = s2 / n;
  for (const PathRecord& r : paths) {
    s11 += (r.levels[0] - m1) * (r.levels[0] - m1);
    s12 += (r.levels[0] - m1) * (r.levels[1] - m2);
  }
  const double v1 = to_double(m.C(0, 0));
  EXPECT_NEAR(m1, to_double(m.mu(0)), 4 * std::sqrt(v1 / n));
  EXPECT_NEAR(truth / n, 1.0, 4 * std::sqrt(1.0 / n));
  EXPECT_NEAR(s11 / n, 1.32828125, 4 * v1 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s12 / n, 1.142578125, 4 * v1 * std::sqrt(2.0 / n));
}

TEST(CostModel, Geometric) {
  const CostModel c = CostModel::geometric(1e-6, 6);
  EXPECT_NEAR(c.level_cost(1), 6.4e-5, 1e-18);
  const CostModel c2 = CostModel::geometric(0.25, 2);
  for (int l = 2; l <= 6; ++l) EXPECT_DOUBLE_EQ(c2.level_cost(l) / c2.level_cost(l - 1), 4.0);
  EXPECT_DOUBLE_EQ(c2.level_cost(1), 1.0);
}

TEST(CostModel, Table) {
  const CostModel c = CostModel::table({1, 3, 9});
  EXPECT_EQ(c.level_cost(2), 3);
  EXPECT_THROW((void)c.level_cost(4), InvalidArgument);
  EXPECT_THROW((void)level_cost(c, 3, 2), InvalidArgument);
  EXPECT_THROW((void)CostModel::table({1, -1}), InvalidArgument);
}

}  // namespace
}  // namespace mlblue
