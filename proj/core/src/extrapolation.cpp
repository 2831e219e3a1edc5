// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlblue/error.hpp"

namespace mlblue {

namespace {

std::vector<double> fill_counts(std::vector<double> m, std::size_t groups) {
  if (m.empty()) return std::vector<double>(groups, 1.0);
  if (m.size() != groups) {
    throw InvalidArgument("scheme: expected " + std::to_string(groups) + " sample counts, got " +
                          std::to_string(m.size()));
  }
  for (double x : m) {
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidArgument("scheme: sample counts must be >= 0");
  }
  return m;
}

void check_levels(int levels) {
  if (levels < 1) throw InvalidArgument("scheme: levels must be >= 1");
}

}  // namespace

Vector unit_vector(int levels, int l) {
  if (l < 1 || l > levels) throw InvalidArgument("unit vector: index out of range");
  Vector e = Vector::Zero(levels);
  e(l - 1) = 1;
  return e;
}

Vector down_shift(const Vector& v) {
  const Eigen::Index n = v.size();
  if (n == 0) return v;
  if (v(n - 1) != 0) throw InvalidArgument("down shift: last entry must vanish");
  Vector out = Vector::Zero(n);
  out.tail(n - 1) = v.head(n - 1);
  return out;
}

RECoefficients re_vectors(int levels, const RateVector& rates, int q) {
  check_levels(levels);
  if (q < 2) throw InvalidArgument("re: order q must be >= 2");
  rates.validate();
  if (rates.size() < q - 1) {
    throw InvalidArgument("re: order " + std::to_string(q) + " needs " + std::to_string(q - 1) +
                          " rates, got " + std::to_string(rates.size()));
  }
  RECoefficients out;
  out.levels = levels;
  out.order = q;
  out.rates = rates;
  out.v.reserve(static_cast<std::size_t>(levels) + 1);
  out.v.push_back(Vector::Zero(levels));
  out.v.push_back(unit_vector(levels, 1));
  for (int k = 2; k <= levels; ++k) {
    const Vector& prev = out.v.back();
    const Vector shifted = down_shift(prev);
    if (k < q) {
      const Real f = exp2r(Real(rates.gamma(k)));
      out.v.push_back((f * shifted - prev) / (f - 1));
    } else {
      out.v.push_back(shifted);
    }
  }
  return out;
}

Real WeightedREWeights::max_abs() const {
  Real best = 0;
  for (const Real& x : a) best = std::max(best, Real(abs(x)));
  return best;
}

WeightedREWeights weighted_re_weights(int levels, const RateVector& rates, int s, int t) {
  check_levels(levels);
  if (s < 2 || t < 2) throw InvalidArgument("weighted re: orders s and t must be >= 2");
  const RECoefficients vs = re_vectors(levels, rates, s);
  const RECoefficients vt = re_vectors(levels, rates, t);
  const Vector& target = vt.at(levels);

  WeightedREWeights out;
  out.s = s;
  out.t = t;
  out.conjectural = s > t;
  out.a.assign(static_cast<std::size_t>(levels), Real(0));
  // The k-th difference is supported on levels <= k with a nonzero entry at k.
  Vector r = target;
  for (int k = levels; k >= 1; --k) {
    const Vector d = vs.difference(k);
    const Real pivot = d(k - 1);
    if (pivot == 0) throw NumericalError("weighted re: degenerate difference basis");
    const Real a = r(k - 1) / pivot;
    out.a[static_cast<std::size_t>(k - 1)] = a;
    r -= a * d;
  }
  Vector recon = Vector::Zero(levels);
  for (int k = 1; k <= levels; ++k) recon += out.a[static_cast<std::size_t>(k - 1)] * vs.difference(k);
  out.residual = to_double((recon - target).cwiseAbs().maxCoeff());
  if (!(out.residual < 1e-10)) throw NumericalError("weighted re: reconstruction failed");
  return out;
}

GroupSystem re_groups(int levels, int q, const CostModel& cost) {
  check_levels(levels);
  if (q < 1) throw InvalidArgument("re: coupling must be >= 1");
  std::vector<ModelGroup> groups;
  groups.reserve(static_cast<std::size_t>(levels));
  for (int k = 1; k <= levels; ++k) {
    std::vector<int> idx(static_cast<std::size_t>(k - std::max(k - q + 1, 1) + 1));
    std::iota(idx.begin(), idx.end(), std::max(k - q + 1, 1));
    groups.emplace_back(std::move(idx));
  }
  return GroupSystem(levels, std::move(groups), cost, std::min(q, levels));
}

EstimatorScheme mc_scheme(int levels, double m, const CostModel& cost) {
  check_levels(levels);
  GroupSystem system(levels, {ModelGroup({levels})}, cost, 1);
  return EstimatorScheme{"mc", std::move(system), {unit_vector(levels, levels)},
                         fill_counts({m}, 1), unit_vector(levels, levels), {}};
}

EstimatorScheme mc_scheme(const Vector& alpha, std::vector<double> m, const CostModel& cost) {
  const int levels = static_cast<int>(alpha.size());
  check_levels(levels);
  std::vector<ModelGroup> groups;
  std::vector<Vector> betas;
  for (int l = 1; l <= levels; ++l) {
    if (alpha(l - 1) == 0) continue;
    groups.emplace_back(std::vector<int>{l});
    betas.push_back(alpha(l - 1) * unit_vector(levels, l));
  }
  if (groups.empty()) throw InvalidArgument("mc: alpha must be nonzero");
  GroupSystem system(levels, std::move(groups), cost, 1);
  m = fill_counts(std::move(m), system.size());
  return EstimatorScheme{"mc", std::move(system), std::move(betas), std::move(m), alpha, {}};
}

EstimatorScheme mlmc_scheme(int levels, std::vector<double> m, const CostModel& cost) {
  GroupSystem system = re_groups(levels, 2, cost);
  std::vector<Vector> betas;
  for (int k = 1; k <= levels; ++k) {
    Vector b = unit_vector(levels, k);
    if (k > 1) b(k - 2) = -1;
    betas.push_back(std::move(b));
  }
  m = fill_counts(std::move(m), system.size());
  return EstimatorScheme{"mlmc", std::move(system), std::move(betas), std::move(m),
                         unit_vector(levels, levels), {}};
}

EstimatorScheme re_scheme(int levels, const RateVector& rates, int q, std::vector<double> m,
                          const CostModel& cost) {
  const RECoefficients v = re_vectors(levels, rates, q);
  GroupSystem system = re_groups(levels, q, cost);
  std::vector<Vector> betas;
  for (int k = 1; k <= levels; ++k) betas.push_back(v.difference(k));
  m = fill_counts(std::move(m), system.size());
  return EstimatorScheme{"re" + std::to_string(q), std::move(system), std::move(betas),
                         std::move(m), v.at(levels), {}};
}

EstimatorScheme weighted_re_scheme(int levels, const RateVector& rates, int s, int t,
                                   std::vector<double> m, const CostModel& cost) {
  const WeightedREWeights w = weighted_re_weights(levels, rates, s, t);
  const RECoefficients vs = re_vectors(levels, rates, s);
  const RECoefficients vt = re_vectors(levels, rates, t);
  GroupSystem system = re_groups(levels, s, cost);
  std::vector<Vector> betas;
  for (int k = 1; k <= levels; ++k) betas.push_back(w.a[static_cast<std::size_t>(k - 1)] * vs.difference(k));
  m = fill_counts(std::move(m), system.size());
  EstimatorScheme scheme{"wre" + std::to_string(s) + "_" + std::to_string(t), std::move(system),
                         std::move(betas), std::move(m), vt.at(levels), {}};
  if (w.conjectural) scheme.notes.emplace_back("conjectural boundedness (s > t)");
  return scheme;
}

Real re_bias(const Vector& v, const MomentData& moments) {
  if (v.size() != moments.mu.size()) throw InvalidArgument("bias: dimension mismatch");
  return abs(v.dot(moments.mu) - moments.truth_mean);
}

}  // namespace mlblue
