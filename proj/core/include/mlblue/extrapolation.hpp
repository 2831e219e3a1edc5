// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Richardson extrapolation coefficients and the telescoping estimators built
// from them (MC, MLMC, RE,q and weighted RE).
//
// For 1 < k < q the vector v^{k,q} eliminates the expansion term of rate
// gamma^k, v^{k,q} = (2^{gamma^k} D v^{k-1,q} - v^{k-1,q}) / (2^{gamma^k} - 1);
// for k >= q it is the down shift D v^{k-1,q}. Only gamma^2..gamma^{q-1}
// enter the recursion.

#include <vector>

#include "mlblue/blue.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/model_family.hpp"
#include "mlblue/real.hpp"

namespace mlblue {

struct RECoefficients {
  int levels = 0;
  int order = 0;
  RateVector rates;
  std::vector<Vector> v;  // v[k] = v^{k,q}, k = 0..levels

  [[nodiscard]] const Vector& at(int k) const { return v.at(static_cast<std::size_t>(k)); }
  /// v^{k,q} - v^{k-1,q}, k >= 1.
  [[nodiscard]] Vector difference(int k) const { return at(k) - at(k - 1); }
};

/// (D v)_l = v_{l-1}, (D v)_1 = 0. Requires v_L = 0.
[[nodiscard]] Vector down_shift(const Vector& v);

/// v^{0,q}, ..., v^{L,q}. Requires q >= 2 and at least q - 1 rates.
[[nodiscard]] RECoefficients re_vectors(int levels, const RateVector& rates, int q);

struct WeightedREWeights {
  std::vector<Real> a;  // a_1..a_L
  int s = 0;
  int t = 0;
  double residual = 0;  // ||sum a_k (v^{k,s} - v^{k-1,s}) - v^{L,t}||_inf
  bool conjectural = false;  // s > t: boundedness of a_k is not established

  [[nodiscard]] Real max_abs() const;
};

/// a_1..a_L with v^{L,t} = sum_k a_k (v^{k,s} - v^{k-1,s}), by back
/// substitution on the triangular difference basis.
[[nodiscard]] WeightedREWeights weighted_re_weights(int levels, const RateVector& rates, int s,
                                                    int t);

/// S^k = {max(k-q+1,1), ..., k}, k = 1..L (not canonically ordered: index k-1 is S^k).
[[nodiscard]] GroupSystem re_groups(int levels, int q, const CostModel& cost);

// Scheme builders. An empty m means one sample per group.

/// Plain MC on the finest level.
[[nodiscard]] EstimatorScheme mc_scheme(int levels, double m, const CostModel& cost);
/// Independent MC estimates of every level in the support of alpha.
[[nodiscard]] EstimatorScheme mc_scheme(const Vector& alpha, std::vector<double> m,
                                        const CostModel& cost);
[[nodiscard]] EstimatorScheme mlmc_scheme(int levels, std::vector<double> m,
                                          const CostModel& cost);
[[nodiscard]] EstimatorScheme re_scheme(int levels, const RateVector& rates, int q,
                                        std::vector<double> m, const CostModel& cost);
[[nodiscard]] EstimatorScheme weighted_re_scheme(int levels, const RateVector& rates, int s,
                                                 int t, std::vector<double> m,
                                                 const CostModel& cost);

/// |v^T mu - E[Z]|.
[[nodiscard]] Real re_bias(const Vector& v, const MomentData& moments);

/// e_l in R^L (one-based l).
[[nodiscard]] Vector unit_vector(int levels, int l);

}  // namespace mlblue
