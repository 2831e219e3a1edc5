// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "mlblue/allocation.hpp"
#include "mlblue/error.hpp"
#include "mlblue/extrapolation.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/model_family.hpp"
#include "oracles.hpp"

namespace mlblue {
namespace {

const CostModel kToyCost = CostModel::geometric(0.25, 2);

std::vector<Real> reals(std::initializer_list<double> xs) { return {xs.begin(), xs.end()}; }

TEST(ClosedForm, SingleGroup) {
  const std::vector<Real> s2 = reals({3});
  const std::vector<double> w{2};
  const ClosedFormResult r = closed_form_allocation(s2, w, 10);
  EXPECT_DOUBLE_EQ(r.allocation.m[0], 5);
  EXPECT_NEAR(to_double(r.objective), 0.6, 1e-15);
}

TEST(ClosedForm, TwoGroups) {
  const std::vector<Real> s2 = reals({4, 1});
  const std::vector<double> w{1, 4};
  const ClosedFormResult r = closed_form_allocation(s2, w, 8);
  EXPECT_DOUBLE_EQ(r.allocation.m[0], 4);
  EXPECT_DOUBLE_EQ(r.allocation.m[1], 1);
  EXPECT_NEAR(to_double(r.objective), 2, 1e-15);
  EXPECT_DOUBLE_EQ(r.allocation.cost, 8);
}

TEST(ClosedForm, Homogeneity) {
  const std::vector<Real> s2 = reals({2.5, 0.7, 0.01});
  const std::vector<double> w{1, 3, 9};
  const ClosedFormResult a = closed_form_allocation(s2, w, 50);
  const ClosedFormResult b = closed_form_allocation(s2, w, 100);
  EXPECT_NEAR(to_double(b.objective), to_double(a.objective) / 2, 1e-15);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(b.allocation.m[k], 2 * a.allocation.m[k], 1e-12);
}

TEST(ClosedForm, MatchesSimplexOracle) {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Real> s2 = reals({u(gen), u(gen), u(gen)});
    std::vector<double> w{u(gen), u(gen), u(gen)};
    const double p = 10 * u(gen);
    const ClosedFormResult r = closed_form_allocation(s2, w, p);
    const double ref = oracle::simplex_minimize(
        3,
        [&](const std::vector<double>& b) {
          double j = 0;
          for (int k = 0; k < 3; ++k) j += to_double(s2[k]) * w[k] / (b[k] * p);
          return std::isfinite(j) ? j : std::numeric_limits<double>::infinity();
        },
        20000);
    EXPECT_NEAR(to_double(r.objective), ref, 1e-6 * ref);
  }
}

TEST(ClosedForm, RejectsBadInput) {
  const std::vector<Real> s2 = reals({1});
  EXPECT_THROW((void)closed_form_allocation(s2, std::vector<double>{0}, 1), InvalidArgument);
  EXPECT_THROW((void)closed_form_allocation(s2, std::vector<double>{1}, -1), InvalidArgument);
  EXPECT_THROW((void)closed_form_allocation(s2, std::vector<double>{1, 2}, 1), InvalidArgument);
}

TEST(Saob, SingleLevel) {
  Matrix c(1, 1);
  c(0, 0) = 2;
  const GroupSystem s(1, {ModelGroup({1})}, CostModel::table({4}), 1);
  const SaobResult r = saob_allocate(s, c, unit_vector(1, 1), 20);
  EXPECT_NEAR(r.allocation.m[0], 5, 1e-12);
  EXPECT_NEAR(to_double(r.variance), 2.0 * 4 / 20, 1e-14);
}

TEST(Saob, TwoLevelGridOracle) {
  Matrix c(2, 2);
  c << 1, 0.9, 0.9, 1;
  const GroupSystem s = enumerate_groups(2, 2, CostModel::table({1, 4}));
  const Vector alpha = unit_vector(2, 2);
  const SaobResult r = saob_allocate(s, c, alpha, 100);
  std::vector<oracle::Levels> groups;
  for (const ModelGroup& g : s.groups()) groups.push_back(g.levels());
  const double ref = oracle::simplex_minimize(
      3,
      [&](const std::vector<double>& b) {
        return oracle::blue_variance_fractions(groups, to_double(c), s.costs(), to_double(alpha),
                                               100, b);
      },
      500000);
  EXPECT_NEAR(to_double(r.variance), ref, 1e-6 * ref);
  EXPECT_NEAR(r.allocation.cost, 100, 1e-10);
  EXPECT_LT(r.kkt_residual, 1e-6);
}

TEST(Saob, BeatsReThreeOnToy) {
  const MomentData md = family_moments(ExpansionFamily::toy(6));
  const RateVector rates({0, 1, 2, 3});
  const Vector alpha = unit_vector(4, 4);
  const SaobResult r = saob_allocate(enumerate_groups(4, 3, kToyCost), md.C, alpha, 100);
  const EstimatorScheme re = allocate_scheme(weighted_re_scheme(4, rates, 3, 2, {}, kToyCost), md.C, 100);
  EXPECT_LE(to_double(r.variance), to_double(scheme_variance(re, md.C)) * (1 + 1e-8));
}

TEST(Saob, BudgetIsSpentAndScales) {
  const MomentData md = family_moments(ExpansionFamily::toy(1));
  const GroupCovariance gc(enumerate_groups(4, 4, kToyCost), md.C);
  const SaobResult a = saob_allocate(gc, unit_vector(4, 4), 10);
  const SaobResult b = saob_allocate(gc, unit_vector(4, 4), 1000);
  EXPECT_NEAR(a.allocation.cost, 10, 1e-12 * 10);
  EXPECT_NEAR(to_double(b.variance) * 100, to_double(a.variance), 1e-10 * to_double(a.variance));
  double sum = 0;
  for (double f : a.fractions) sum += f;
  EXPECT_NEAR(sum, 1, 1e-12);
}

TEST(Saob, UncoveredLevelIsInfeasible) {
  const MomentData md = family_moments(ExpansionFamily::toy(0, 3));
  const GroupSystem s(3, {ModelGroup({1}), ModelGroup({2})}, kToyCost, 1);
  EXPECT_THROW((void)saob_allocate(s, md.C, unit_vector(3, 3), 10), InfeasibleError);
}

TEST(Saob, CouplingOneIsMonteCarloLike) {
  const MomentData md = family_moments(ExpansionFamily::toy(0));
  const SaobResult r = saob_allocate(enumerate_groups(4, 1, kToyCost), md.C, unit_vector(4, 4), 100);
  EXPECT_NEAR(to_double(r.variance), to_double(md.C(3, 3)) * kToyCost.level_cost(4) / 100, 1e-9);
}

TEST(Rounding, CeilWithThreshold) {
  const Allocation a{{3.2, 1e-9}, 0};
  const Allocation r = round_allocation(a, std::vector<double>{1, 2}, RoundingPolicy::kCeil, 1e-8);
  EXPECT_EQ(r.m, (std::vector<double>{4, 0}));
  EXPECT_EQ(r.cost, 4);
  const Allocation ints{{2, 5}, 12};
  EXPECT_EQ(round_allocation(ints, std::vector<double>{1, 2}, RoundingPolicy::kCeil).m, ints.m);
  EXPECT_EQ(round_allocation(a, std::vector<double>{1, 2}, RoundingPolicy::kNone).m, a.m);
}

TEST(Rounding, CeilingDominatesAtHighCostRate) {
  const ExpansionFamily f = ExpansionFamily::toy(0);
  const MomentData md = family_moments(f);
  const CostModel cost = CostModel::geometric(1e-6, 6);
  const GroupCovariance gc(enumerate_groups(4, 4, cost), md.C);
  const SaobResult r = saob_allocate(gc, unit_vector(4, 4), 1.0);
  const Allocation rounded = round_allocation(r.allocation, gc.system().costs(), RoundingPolicy::kCeil);
  EXPECT_GT(rounded.cost / r.allocation.cost, 1.0);
}

TEST(BudgetForVariance, SingleModelAndHomogeneity) {
  Matrix c(1, 1);
  c(0, 0) = 3;
  const GroupSystem s(1, {ModelGroup({1})}, CostModel::table({2}), 1);
  const BudgetResult r = budget_for_variance(s, c, unit_vector(1, 1), 0.01);
  EXPECT_NEAR(r.budget, 3.0 * 2 / 0.01, 1e-9);
  const BudgetResult r2 = budget_for_variance(s, c, unit_vector(1, 1), 0.02);
  EXPECT_NEAR(r2.budget, r.budget / 2, 1e-9);
}

TEST(BudgetForVariance, FixedSchemeInvertsClosedForm) {
  const MomentData md = family_moments(ExpansionFamily::toy(2));
  const EstimatorScheme ml = mlmc_scheme(4, {}, kToyCost);
  const double p = scheme_budget_for_variance(ml, md.C, 1e-3);
  const EstimatorScheme at = allocate_scheme(ml, md.C, p);
  EXPECT_NEAR(to_double(scheme_variance(at, md.C)), 1e-3, 1e-12);
  EXPECT_NEAR(scheme_cost(at), p, 1e-9 * p);
}

}  // namespace
}  // namespace mlblue
