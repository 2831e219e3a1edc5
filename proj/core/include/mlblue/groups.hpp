// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlblue/model_family.hpp"
#include "mlblue/real.hpp"

namespace mlblue {

/// Largest number of levels accepted by enumerate_groups.
inline constexpr int kMaxEnumeratedLevels = 20;

/// A non-empty, strictly increasing set of one-based model levels that are
/// evaluated on a shared event.
class ModelGroup {
 public:
  explicit ModelGroup(std::vector<int> levels);

  [[nodiscard]] const std::vector<int>& levels() const { return levels_; }
  [[nodiscard]] int size() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] int finest() const { return levels_.back(); }
  [[nodiscard]] bool contains(int level) const;

  /// Semicolon-joined levels, e.g. "1;3;4".
  [[nodiscard]] std::string label() const;
  static ModelGroup parse(std::string_view label);

  /// Canonical order: by size, then lexicographically.
  friend std::strong_ordering operator<=>(const ModelGroup& a, const ModelGroup& b);
  friend bool operator==(const ModelGroup& a, const ModelGroup& b) = default;

 private:
  std::vector<int> levels_;
};

/// Model groups with their evaluation costs W_k and the coupling bound.
class GroupSystem {
 public:
  /// Groups keep the given order; they must be distinct, within 1..levels and
  /// of size <= coupling.
  GroupSystem(int levels, std::vector<ModelGroup> groups, const CostModel& cost, int coupling);

  [[nodiscard]] int levels() const { return levels_; }
  [[nodiscard]] int coupling() const { return coupling_; }
  [[nodiscard]] std::size_t size() const { return groups_.size(); }
  [[nodiscard]] const ModelGroup& group(std::size_t k) const { return groups_.at(k); }
  [[nodiscard]] const std::vector<ModelGroup>& groups() const { return groups_; }
  [[nodiscard]] double cost(std::size_t k) const { return costs_.at(k); }
  [[nodiscard]] const std::vector<double>& costs() const { return costs_; }
  [[nodiscard]] std::optional<std::size_t> find(const ModelGroup& g) const;

 private:
  int levels_;
  int coupling_;
  std::vector<ModelGroup> groups_;
  std::vector<double> costs_;
};

/// All subsets of {1..L} with 1 <= |S| <= min(q, L), canonically ordered.
[[nodiscard]] GroupSystem enumerate_groups(int levels, int coupling, const CostModel& cost);

/// Number of groups enumerate_groups produces.
[[nodiscard]] std::size_t enumerated_group_count(int levels, int coupling);

/// W = sum of the level costs in the group.
[[nodiscard]] double group_cost(const ModelGroup& group, const CostModel& cost);

/// C restricted to the rows and columns of the group.
[[nodiscard]] Matrix principal_submatrix(const Matrix& c, const ModelGroup& group);

/// v_S, the coordinates of v in the group.
[[nodiscard]] Vector restrict_to(const Vector& v, const ModelGroup& group);

/// Embeds v_S into R^L with zeros outside the group.
[[nodiscard]] Vector prolong(const Vector& v_s, const ModelGroup& group, int levels);

}  // namespace mlblue
