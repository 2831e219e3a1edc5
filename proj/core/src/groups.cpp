// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/groups.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

#include "mlblue/error.hpp"

namespace mlblue {

ModelGroup::ModelGroup(std::vector<int> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw InvalidArgument("group: must not be empty");
  if (levels_.front() < 1) throw InvalidArgument("group: levels are one-based");
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    if (levels_[i] <= levels_[i - 1]) {
      throw InvalidArgument("group: levels must be strictly increasing");
    }
  }
}

bool ModelGroup::contains(int level) const {
  return std::binary_search(levels_.begin(), levels_.end(), level);
}

std::string ModelGroup::label() const {
  std::string out;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(levels_[i]);
  }
  return out;
}

ModelGroup ModelGroup::parse(std::string_view label) {
  std::vector<int> levels;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    const std::size_t end = std::min(label.find(';', pos), label.size());
    const std::string_view token = label.substr(pos, end - pos);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
      throw InvalidArgument("group: cannot parse '" + std::string(label) + "'");
    }
    levels.push_back(value);
    pos = end + 1;
  }
  return ModelGroup(std::move(levels));
}

std::strong_ordering operator<=>(const ModelGroup& a, const ModelGroup& b) {
  if (auto c = a.levels_.size() <=> b.levels_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.levels_.begin(), a.levels_.end(),
                                                b.levels_.begin(), b.levels_.end());
}

GroupSystem::GroupSystem(int levels, std::vector<ModelGroup> groups, const CostModel& cost,
                         int coupling)
    : levels_(levels), coupling_(coupling), groups_(std::move(groups)) {
  if (levels_ < 1) throw InvalidArgument("groups: levels must be >= 1");
  if (coupling_ < 1) throw InvalidArgument("groups: coupling must be >= 1");
  if (groups_.empty()) throw InvalidArgument("groups: at least one group is required");
  std::set<ModelGroup> seen;
  costs_.reserve(groups_.size());
  for (const auto& g : groups_) {
    if (g.finest() > levels_) throw InvalidArgument("groups: group " + g.label() + " exceeds L");
    if (g.size() > coupling_) {
      throw InvalidArgument("groups: group " + g.label() + " exceeds the coupling bound");
    }
    if (!seen.insert(g).second) throw InvalidArgument("groups: duplicate group " + g.label());
    costs_.push_back(group_cost(g, cost));
  }
}

std::optional<std::size_t> GroupSystem::find(const ModelGroup& g) const {
  const auto it = std::find(groups_.begin(), groups_.end(), g);
  if (it == groups_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - groups_.begin());
}

std::size_t enumerated_group_count(int levels, int coupling) {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (int j = 1; j <= std::min(coupling, levels); ++j) {
    binom = binom * static_cast<std::size_t>(levels - j + 1) / static_cast<std::size_t>(j);
    total += binom;
  }
  return total;
}

GroupSystem enumerate_groups(int levels, int coupling, const CostModel& cost) {
  if (levels < 1) throw InvalidArgument("groups: levels must be >= 1");
  if (coupling < 1) throw InvalidArgument("groups: coupling must be >= 1");
  if (levels > kMaxEnumeratedLevels) {
    throw InvalidArgument("groups: more than " + std::to_string(kMaxEnumeratedLevels) +
                          " levels cannot be enumerated");
  }
  const int max_size = std::min(coupling, levels);
  std::vector<ModelGroup> groups;
  groups.reserve(enumerated_group_count(levels, coupling));
  // Combinations of each size in lexicographic order.
  for (int size = 1; size <= max_size; ++size) {
    std::vector<int> comb(static_cast<std::size_t>(size));
    std::iota(comb.begin(), comb.end(), 1);
    while (true) {
      groups.emplace_back(comb);
      int i = size - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == levels - size + i + 1) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) {
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }
  return GroupSystem(levels, std::move(groups), cost, max_size);
}

double group_cost(const ModelGroup& group, const CostModel& cost) {
  double w = 0.0;
  for (int l : group.levels()) w += cost.level_cost(l);
  return w;
}

Matrix principal_submatrix(const Matrix& c, const ModelGroup& group) {
  const int n = group.size();
  if (group.finest() > c.rows()) throw InvalidArgument("submatrix: group exceeds matrix size");
  Matrix out(n, n);
  const auto& idx = group.levels();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) = c(idx[static_cast<std::size_t>(i)] - 1, idx[static_cast<std::size_t>(j)] - 1);
  return out;
}

Vector restrict_to(const Vector& v, const ModelGroup& group) {
  if (group.finest() > v.size()) throw InvalidArgument("restrict: group exceeds vector size");
  Vector out(group.size());
  for (int i = 0; i < group.size(); ++i) out(i) = v(group.levels()[static_cast<std::size_t>(i)] - 1);
  return out;
}

Vector prolong(const Vector& v_s, const ModelGroup& group, int levels) {
  if (v_s.size() != group.size()) throw InvalidArgument("prolong: size mismatch");
  if (group.finest() > levels) throw InvalidArgument("prolong: group exceeds L");
  Vector out = Vector::Zero(levels);
  for (int i = 0; i < group.size(); ++i) out(group.levels()[static_cast<std::size_t>(i)] - 1) = v_s(i);
  return out;
}

}  // namespace mlblue
