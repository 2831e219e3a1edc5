// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include <gtest/gtest.h>

#include "mlblue/error.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/model_family.hpp"

namespace mlblue {
namespace {

const CostModel kUnit = CostModel::geometric(1, 2);

std::vector<std::string> labels(const GroupSystem& s) {
  std::vector<std::string> out;
  for (const ModelGroup& g : s.groups()) out.push_back(g.label());
  return out;
}

TEST(EnumerateGroups, FullCouplingTwoLevels) {
  const GroupSystem s = enumerate_groups(2, 5, kUnit);
  EXPECT_EQ(labels(s), (std::vector<std::string>{"1", "2", "1;2"}));
  EXPECT_EQ(s.coupling(), 2);
}

TEST(EnumerateGroups, SingletonsOnly) {
  EXPECT_EQ(labels(enumerate_groups(3, 1, kUnit)), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(EnumerateGroups, BinomialCount) {
  EXPECT_EQ(enumerate_groups(6, 3, kUnit).size(), 41u);
  EXPECT_EQ(enumerated_group_count(6, 3), 41u);
  for (int L = 1; L <= 8; ++L) EXPECT_EQ(enumerate_groups(L, L, kUnit).size(), (1u << L) - 1);
}

TEST(EnumerateGroups, CanonicalOrder) {
  const GroupSystem s = enumerate_groups(5, 3, kUnit);
  EXPECT_TRUE(std::is_sorted(s.groups().begin(), s.groups().end()));
  EXPECT_EQ(s.group(5).label(), "1;2");
  EXPECT_EQ(s.find(ModelGroup({2, 4, 5})).has_value(), true);
  EXPECT_FALSE(s.find(ModelGroup({1, 2, 3, 4})).has_value());
}

TEST(EnumerateGroups, RejectsBadInput) {
  EXPECT_THROW((void)enumerate_groups(0, 1, kUnit), InvalidArgument);
  EXPECT_THROW((void)enumerate_groups(3, 0, kUnit), InvalidArgument);
}

TEST(ModelGroup, ParseAndLabel) {
  const ModelGroup g = ModelGroup::parse("1;3;4");
  EXPECT_EQ(g.levels(), (std::vector<int>{1, 3, 4}));
  EXPECT_EQ(g.label(), "1;3;4");
  EXPECT_TRUE(g.contains(3));
  EXPECT_FALSE(g.contains(2));
  EXPECT_EQ(g.finest(), 4);
  EXPECT_THROW((void)ModelGroup::parse("3;1"), InvalidArgument);
  EXPECT_THROW((void)ModelGroup::parse(""), InvalidArgument);
  EXPECT_THROW(ModelGroup({0, 1}), InvalidArgument);
}

TEST(GroupSystem, Validation) {
  EXPECT_THROW(GroupSystem(2, {ModelGroup({1}), ModelGroup({1})}, kUnit, 1), InvalidArgument);
  EXPECT_THROW(GroupSystem(2, {ModelGroup({3})}, kUnit, 1), InvalidArgument);
  EXPECT_THROW(GroupSystem(3, {ModelGroup({1, 2})}, kUnit, 1), InvalidArgument);
}

TEST(GroupCost, SumOfLevelCosts) {
  EXPECT_EQ(group_cost(ModelGroup({1, 2}), CostModel::table({1, 4})), 5);
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(group_cost(ModelGroup({k}), kUnit), std::exp2(2.0 * k));
  // A chain {1..k} costs at most 4/3 of its finest level at cost rate 2.
  for (int k = 1; k <= 8; ++k) {
    std::vector<int> chain(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) chain[static_cast<std::size_t>(i)] = i + 1;
    EXPECT_LE(group_cost(ModelGroup(chain), kUnit), 4.0 / 3.0 * std::exp2(2.0 * k));
  }
}

TEST(Submatrix, IdentityAndFamilyBlocks) {
  EXPECT_EQ(principal_submatrix(Matrix::Identity(4, 4), ModelGroup({1, 3, 4})), Matrix::Identity(3, 3));
  const MomentData m = family_moments(ExpansionFamily::toy(0));
  const Matrix s = principal_submatrix(m.C, ModelGroup({2, 4}));
  EXPECT_EQ(s(0, 0), m.C(1, 1));
  EXPECT_EQ(s(0, 1), m.C(1, 3));
  EXPECT_EQ(s(1, 0), m.C(3, 1));
  EXPECT_EQ(s(1, 1), m.C(3, 3));
}

TEST(RestrictProlong, CoordinateSelection) {
  Vector v(3);
  v << 3, 5, 7;
  const ModelGroup g({1, 3});
  const Vector r = restrict_to(v, g);
  ASSERT_EQ(r.size(), 2);
  EXPECT_EQ(r(0), 3);
  EXPECT_EQ(r(1), 7);
  const Vector p = prolong(r, g, 3);
  EXPECT_EQ(p(0), 3);
  EXPECT_EQ(p(1), 0);
  EXPECT_EQ(p(2), 7);
}

}  // namespace
}  // namespace mlblue
