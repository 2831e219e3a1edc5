// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <boost/multiprecision/cpp_int.hpp>

#include <gtest/gtest.h>

#include "mlblue/blue.hpp"
#include "mlblue/error.hpp"
#include "mlblue/extrapolation.hpp"
#include "mlblue/model_family.hpp"

namespace mlblue {
namespace {

using Rational = boost::multiprecision::cpp_rational;
using RVec = std::vector<Rational>;

const CostModel kCost = CostModel::geometric(0.25, 2);

// Exact recursion for integer rates: v^1 = e_1, v^k = (f Dv - v)/(f - 1)
// with f = 2^{gamma_k} while k < q, plain down shift afterwards.
std::vector<RVec> exact_re(int L, const std::vector<int>& rates, int q) {
  std::vector<RVec> v(static_cast<std::size_t>(L) + 1, RVec(static_cast<std::size_t>(L), 0));
  if (L >= 1) v[1][0] = 1;
  for (int k = 2; k <= L; ++k) {
    RVec shifted(static_cast<std::size_t>(L), 0);
    for (int i = 1; i < L; ++i) shifted[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i - 1)];
    if (k < q) {
      const Rational f = Rational(boost::multiprecision::cpp_int(1) << rates[static_cast<std::size_t>(k - 1)]);
      for (int i = 0; i < L; ++i)
        v[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
            (f * shifted[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)]) / (f - 1);
    } else {
      v[static_cast<std::size_t>(k)] = shifted;
    }
  }
  return v;
}

double to_d(const Rational& r) { return r.convert_to<double>(); }

void expect_vector(const Vector& got, const RVec& want, double tol) {
  ASSERT_EQ(got.size(), static_cast<Eigen::Index>(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_NEAR(to_double(got(static_cast<Eigen::Index>(i))), to_d(want[i]), tol) << "entry " << i;
}

TEST(ReVectors, BaseCase) {
  for (int L = 1; L <= 5; ++L) {
    const RECoefficients v = re_vectors(L, RateVector({0, 2, 4}), 3);
    EXPECT_EQ(v.at(1), unit_vector(L, 1));
    EXPECT_EQ(v.at(0), Vector::Zero(L));
  }
}

TEST(ReVectors, MatchesExactRecursion) {
  const std::vector<std::vector<int>> rate_sets{{0, 2, 4}, {0, 1, 2, 3}, {0, 1, 3, 4, 6}};
  for (const auto& rs : rate_sets) {
    std::vector<double> g(rs.begin(), rs.end());
    for (int q = 2; q <= static_cast<int>(rs.size()) + 1; ++q) {
      for (int L = 1; L <= 8; ++L) {
        const RECoefficients v = re_vectors(L, RateVector(g), q);
        const auto want = exact_re(L, rs, q);
        for (int k = 0; k <= L; ++k) expect_vector(v.at(k), want[static_cast<std::size_t>(k)], 1e-30);
      }
    }
  }
}

TEST(ReVectors, RatesZeroTwoFour) {
  const RateVector rates({0, 2, 4});
  const RECoefficients v3 = re_vectors(4, rates, 3);
  expect_vector(v3.at(2), {Rational(-1, 3), Rational(4, 3), 0, 0}, 1e-32);
  expect_vector(v3.at(3), {0, Rational(-1, 3), Rational(4, 3), 0}, 1e-32);
  expect_vector(v3.at(4), {0, 0, Rational(-1, 3), Rational(4, 3)}, 1e-32);
  const RECoefficients v4 = re_vectors(4, rates, 4);
  expect_vector(v4.at(3), {Rational(1, 45), Rational(-4, 9), Rational(64, 45), 0}, 1e-32);
  expect_vector(v4.at(4), {0, Rational(1, 45), Rational(-4, 9), Rational(64, 45)}, 1e-32);
}

TEST(ReVectors, SumToOne) {
  for (int q = 2; q <= 4; ++q) {
    const RECoefficients v = re_vectors(10, RateVector({0, 2, 4}), q);
    for (int k = 1; k <= 10; ++k) EXPECT_LT(to_double(abs(v.at(k).sum() - 1)), 1e-30);
  }
}

TEST(ReVectors, MlmcOrder) {
  const RECoefficients v = re_vectors(6, RateVector({0, 1}), 2);
  for (int k = 1; k <= 6; ++k) EXPECT_EQ(v.at(k), unit_vector(6, k));
}

TEST(ReVectors, NeedsEnoughRates) {
  EXPECT_THROW((void)re_vectors(4, RateVector({0, 2}), 4), InvalidArgument);
  EXPECT_THROW((void)re_vectors(4, RateVector({0, 2}), 1), InvalidArgument);
  EXPECT_NO_THROW((void)re_vectors(4, RateVector({0, 2}), 3));
}

TEST(DownShift, ShiftsAndRejectsOverflow) {
  Vector v(3);
  v << 1, 2, 0;
  const Vector d = down_shift(v);
  EXPECT_EQ(d(0), 0);
  EXPECT_EQ(d(1), 1);
  EXPECT_EQ(d(2), 2);
  v(2) = 1;
  EXPECT_THROW((void)down_shift(v), InvalidArgument);
}

TEST(ReScheme, OrderTwoIsMlmc) {
  const EstimatorScheme re = re_scheme(5, RateVector({0, 2, 4}), 2, {}, kCost);
  const EstimatorScheme ml = mlmc_scheme(5, {}, kCost);
  ASSERT_EQ(re.system.size(), ml.system.size());
  for (std::size_t k = 0; k < re.system.size(); ++k) {
    EXPECT_EQ(re.system.group(k), ml.system.group(k));
    EXPECT_EQ(re.betas[k], ml.betas[k]);
  }
  EXPECT_EQ(re.alpha, ml.alpha);
}

TEST(ReScheme, GroupsAndLastDifference) {
  const EstimatorScheme re = re_scheme(4, RateVector({0, 2, 4}), 3, {}, kCost);
  EXPECT_EQ(re.system.group(2).label(), "1;2;3");
  EXPECT_EQ(re.system.group(3).label(), "2;3;4");
  // v^{4,3} - v^{3,3} with v^{k,3} = shifted (-1/3, 4/3).
  expect_vector(re.betas[3], {0, Rational(1, 3), Rational(-5, 3), Rational(4, 3)}, 1e-32);
  Vector sum = Vector::Zero(4);
  for (const Vector& b : re.betas) sum += b;
  EXPECT_LT(to_double((sum - re.alpha).cwiseAbs().maxCoeff()), 1e-32);
}

TEST(WeightedRe, EqualOrdersGiveUnitWeights) {
  for (int s = 2; s <= 4; ++s) {
    const WeightedREWeights w = weighted_re_weights(7, RateVector({0, 2, 4}), s, s);
    for (const Real& a : w.a) EXPECT_LT(to_double(abs(a - 1)), 1e-30);
  }
}

TEST(WeightedRe, MlmcTelescopeTowardThirdOrder) {
  const RateVector rates({0, 2, 4});
  const WeightedREWeights w2 = weighted_re_weights(2, rates, 2, 3);
  EXPECT_LT(to_double(abs(w2.a[0] - 1)), 1e-30);
  EXPECT_LT(to_double(abs(w2.a[1] - Real(4) / 3)), 1e-30);
  const WeightedREWeights w3 = weighted_re_weights(3, rates, 2, 3);
  EXPECT_LT(to_double(abs(w3.a[0] - 1)), 1e-30);
  EXPECT_LT(to_double(abs(w3.a[1] - 1)), 1e-30);
  EXPECT_LT(to_double(abs(w3.a[2] - Real(4) / 3)), 1e-30);
  // Toward fourth order the weights follow (1/45, -4/9, 64/45) summed up.
  const WeightedREWeights w4 = weighted_re_weights(3, rates, 2, 4);
  EXPECT_LT(to_double(abs(w4.a[1] - Real(44) / 45)), 1e-30);
  EXPECT_LT(to_double(abs(w4.a[2] - Real(64) / 45)), 1e-30);
  EXPECT_FALSE(w4.conjectural);
  EXPECT_TRUE(weighted_re_weights(5, rates, 4, 2).conjectural);
}

TEST(WeightedRe, SchemeIsUnbiased) {
  const RateVector rates({0, 1, 2, 3});
  for (int s = 2; s <= 5; ++s)
    for (int t = 2; t <= 5; ++t) {
      const EstimatorScheme sc = weighted_re_scheme(8, rates, s, t, {}, kCost);
      EXPECT_TRUE(check_unbiased(sc).ok) << s << "," << t;
      EXPECT_EQ(sc.alpha, re_vectors(8, rates, t).at(8));
    }
}

TEST(Schemes, McVariance) {
  const MomentData md = family_moments(ExpansionFamily::toy(0, 3));
  EXPECT_LT(to_double(abs(scheme_variance(mc_scheme(3, 7, kCost), md.C) - md.C(2, 2) / 7)), 1e-30);
}

TEST(Schemes, TwoLevelMlmcVariance) {
  const MomentData md = family_moments(ExpansionFamily::toy(1, 2));
  const EstimatorScheme ml = mlmc_scheme(2, {6, 3}, kCost);
  const Real expect = md.C(0, 0) / 6 + (md.C(0, 0) + md.C(1, 1) - 2 * md.C(0, 1)) / 3;
  EXPECT_LT(to_double(abs(scheme_variance(ml, md.C) - expect)), 1e-30);
}

TEST(Schemes, McWithGeneralAlpha) {
  Vector alpha(4);
  alpha << 0, 0.5, 0, -2;
  const EstimatorScheme mc = mc_scheme(alpha, {}, kCost);
  EXPECT_EQ(mc.system.size(), 2u);
  EXPECT_TRUE(check_unbiased(mc).ok);
}

TEST(ReBias, Basics) {
  const MomentData zero = family_moments(ExpansionFamily::toy(0));
  EXPECT_EQ(re_bias(re_vectors(4, RateVector({0, 1, 2, 3}), 3).at(4), zero), 0);
  Vector mean(4);
  mean << 1, 1, 1, 1;
  const MomentData md = family_moments(ExpansionFamily::toy(0).with_mean(mean));
  for (int l = 1; l <= 4; ++l)
    EXPECT_EQ(re_bias(unit_vector(4, l), md), abs(md.mu(l - 1) - md.truth_mean));
}

TEST(ReBias, DecaysWithTheOrder) {
  Vector mean(4);
  mean << 1, 1, 1, 1;
  const ExpansionFamily f = ExpansionFamily::toy(0, 12).with_mean(mean);
  const MomentData md = family_moments(f);
  for (int q = 2; q <= 4; ++q) {
    const RECoefficients v = re_vectors(12, f.rates(), q);
    const double gamma = f.rates().gamma(q);
    for (int k = 6; k <= 12; ++k) {
      const double ratio = to_double(re_bias(v.at(k), md.truncated(12)) /
                                     re_bias(v.at(k - 1), md.truncated(12)));
      EXPECT_NEAR(std::log2(ratio), -gamma, 0.1 * gamma) << "q=" << q << " k=" << k;
    }
  }
}

}  // namespace
}  // namespace mlblue
