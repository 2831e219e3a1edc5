// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/blue.hpp"

#include <cmath>

#include "mlblue/error.hpp"
#include "mlblue/linalg.hpp"

namespace mlblue {

double allocation_cost(std::span<const double> m, std::span<const double> costs) {
  if (m.size() != costs.size()) throw InvalidArgument("allocation: size mismatch with groups");
  double total = 0;
  for (std::size_t k = 0; k < m.size(); ++k) total += m[k] * costs[k];
  return total;
}

GroupCovariance::GroupCovariance(const GroupSystem& system, const Matrix& c)
    : system_(system), c_(c) {
  if (c_.rows() != system_.levels() || c_.cols() != system_.levels()) {
    throw InvalidArgument("covariance: expected an L x L matrix");
  }
  inverses_.reserve(system_.size());
  conditions_.reserve(system_.size());
  for (std::size_t k = 0; k < system_.size(); ++k) {
    const ModelGroup& g = system_.group(k);
    const Matrix sub = principal_submatrix(c_, g);
    const SpdFactor factor(sub, "covariance of group " + g.label());
    inverses_.push_back(factor.inverse());
    conditions_.push_back(g.size() == 1 ? Real(1) : spd_condition_number(sub));
    if (conditions_.back() > Real(kNearSingularCondition)) near_singular_.push_back(k);
  }
}

Matrix GroupCovariance::psi(std::span<const Real> weights) const {
  if (weights.size() != size()) throw InvalidArgument("psi: one weight per group required");
  const int levels = system_.levels();
  Matrix out = Matrix::Zero(levels, levels);
  for (std::size_t k = 0; k < size(); ++k) {
    const Real w = weights[k];
    if (w < 0) throw InvalidArgument("psi: negative sample count");
    if (w == 0) continue;
    const auto& idx = system_.group(k).levels();
    const Matrix& inv = inverses_[k];
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        out(idx[i] - 1, idx[j] - 1) += w * inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

Matrix GroupCovariance::psi(std::span<const double> m) const {
  std::vector<Real> w(m.begin(), m.end());
  return psi(std::span<const Real>(w));
}

Real GroupCovariance::quadratic(std::size_t k, const Vector& x) const {
  const Vector xs = restrict_to(x, system_.group(k));
  return xs.dot(inverses_.at(k) * xs);
}

Vector GroupCovariance::apply(std::size_t k, const Vector& x) const {
  const ModelGroup& g = system_.group(k);
  return prolong(inverses_.at(k) * restrict_to(x, g), g, system_.levels());
}

Matrix assemble_psi(const GroupSystem& system, const Matrix& c, std::span<const double> m) {
  if (m.size() != system.size()) throw InvalidArgument("psi: one sample count per group required");
  // Only groups that are sampled need a regular submatrix.
  std::vector<ModelGroup> used;
  std::vector<double> used_m;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] < 0) throw InvalidArgument("psi: negative sample count");
    if (m[k] > 0) {
      used.push_back(system.group(k));
      used_m.push_back(m[k]);
    }
  }
  if (used.empty()) return Matrix::Zero(system.levels(), system.levels());
  const GroupSystem sub(system.levels(), std::move(used), CostModel::table(
                            std::vector<double>(static_cast<std::size_t>(system.levels()), 1.0)),
                        system.coupling());
  return GroupCovariance(sub, c).psi(std::span<const double>(used_m));
}

namespace {

// Solves Psi x = b on the levels sampled by at least one group. Unsampled
// levels have an exactly zero row in Psi; alpha must vanish there.
Vector solve_sampled(const Matrix& psi, const Vector& b, const Vector& alpha) {
  std::vector<Eigen::Index> sampled;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    if (psi(i, i) != 0) {
      sampled.push_back(i);
    } else if (alpha(i) != 0) {
      throw NumericalError("Psi: level " + std::to_string(i + 1) +
                           " carries weight in alpha but has no samples");
    }
  }
  if (sampled.size() == static_cast<std::size_t>(psi.rows())) return SpdFactor(psi, "Psi").solve(b);
  const auto n = static_cast<Eigen::Index>(sampled.size());
  Matrix sub(n, n);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs(i) = b(sampled[i]);
    for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = psi(sampled[i], sampled[j]);
  }
  const Vector xs = SpdFactor(sub, "Psi").solve(rhs);
  Vector x = Vector::Zero(psi.rows());
  for (Eigen::Index i = 0; i < n; ++i) x(sampled[i]) = xs(i);
  return x;
}

}  // namespace

Real blue_variance(const Matrix& psi, const Vector& alpha) {
  if (psi.rows() != alpha.size()) throw InvalidArgument("variance: dimension mismatch");
  return alpha.dot(solve_sampled(psi, alpha, alpha));
}

Real blue_point_estimate(const GroupSystem& system, const Matrix& c,
                         std::span<const GroupSamples> samples, const Vector& alpha) {
  if (samples.size() != system.size()) throw InvalidArgument("estimate: one sample block per group");
  const int levels = system.levels();
  if (alpha.size() != levels) throw InvalidArgument("estimate: alpha must have length L");
  std::vector<double> m(system.size());
  for (std::size_t k = 0; k < system.size(); ++k) {
    if (samples[k].rows() > 0 && samples[k].cols() != system.group(k).size()) {
      throw InvalidArgument("estimate: sample block of group " + system.group(k).label() +
                            " has the wrong number of columns");
    }
    m[k] = static_cast<double>(samples[k].rows());
  }
  const Matrix psi = assemble_psi(system, c, m);
  Vector y = Vector::Zero(levels);
  for (std::size_t k = 0; k < system.size(); ++k) {
    if (samples[k].rows() == 0) continue;
    const ModelGroup& g = system.group(k);
    Vector sums = Vector::Zero(g.size());
    for (Eigen::Index i = 0; i < samples[k].rows(); ++i)
      for (int j = 0; j < g.size(); ++j) sums(j) += Real(samples[k](i, j));
    const SpdFactor ck(principal_submatrix(c, g), "covariance of group " + g.label());
    y += prolong(ck.solve(sums), g, levels);
  }
  return alpha.dot(solve_sampled(psi, y, alpha));
}

std::vector<Vector> extract_beta(const GroupCovariance& gc, std::span<const double> m,
                                 const Vector& alpha) {
  if (m.size() != gc.size()) throw InvalidArgument("beta: one sample count per group required");
  if (alpha.size() != gc.levels()) throw InvalidArgument("beta: alpha must have length L");
  const Vector x = solve_sampled(gc.psi(m), alpha, alpha);
  std::vector<Vector> betas;
  betas.reserve(gc.size());
  for (std::size_t k = 0; k < gc.size(); ++k) {
    if (m[k] == 0) {
      betas.push_back(Vector::Zero(gc.levels()));
    } else {
      betas.push_back(Real(m[k]) * gc.apply(k, x));
    }
  }
  return betas;
}

std::vector<Vector> extract_beta(const GroupSystem& system, const Matrix& c,
                                 std::span<const double> m, const Vector& alpha) {
  return extract_beta(GroupCovariance(system, c), m, alpha);
}

std::vector<Real> group_variances(const EstimatorScheme& scheme, const Matrix& c) {
  if (scheme.betas.size() != scheme.system.size()) {
    throw InvalidArgument("scheme: one beta per group required");
  }
  std::vector<Real> out;
  out.reserve(scheme.betas.size());
  for (const Vector& b : scheme.betas) {
    if (b.size() != c.rows()) throw InvalidArgument("scheme: beta length must equal L");
    out.push_back(b.dot(c * b));
  }
  return out;
}

Real scheme_variance(const EstimatorScheme& scheme, const Matrix& c) {
  if (scheme.m.size() != scheme.system.size()) {
    throw InvalidArgument("scheme: one sample count per group required");
  }
  const std::vector<Real> sigma2 = group_variances(scheme, c);
  Real var = 0;
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    const bool nonzero = scheme.betas[k].cwiseAbs().maxCoeff() > 0;
    if (scheme.m[k] == 0) {
      if (nonzero) {
        throw InvalidArgument("scheme: group " + scheme.system.group(k).label() +
                              " has a nonzero coefficient but no samples");
      }
      continue;
    }
    var += sigma2[k] / Real(scheme.m[k]);
  }
  return var;
}

double scheme_cost(const EstimatorScheme& scheme) {
  return allocation_cost(scheme.m, scheme.system.costs());
}

double scheme_cost(const EstimatorScheme& scheme, const CostModel& cost) {
  if (scheme.m.size() != scheme.system.size()) {
    throw InvalidArgument("scheme: one sample count per group required");
  }
  double total = 0;
  for (std::size_t k = 0; k < scheme.m.size(); ++k) {
    total += scheme.m[k] * group_cost(scheme.system.group(k), cost);
  }
  return total;
}

UnbiasedCheck check_unbiased(const EstimatorScheme& scheme, double tol) {
  UnbiasedCheck out;
  const int levels = scheme.system.levels();
  if (scheme.alpha.size() != levels || scheme.betas.size() != scheme.system.size()) {
    out.ok = false;
    out.residual = std::numeric_limits<double>::infinity();
    out.violations.emplace_back("dimension mismatch between alpha, betas and groups");
    return out;
  }
  Vector total = Vector::Zero(levels);
  for (std::size_t k = 0; k < scheme.betas.size(); ++k) {
    const Vector& b = scheme.betas[k];
    const ModelGroup& g = scheme.system.group(k);
    if (b.size() != levels) {
      out.ok = false;
      out.violations.push_back("group " + g.label() + ": beta has the wrong length");
      continue;
    }
    for (int l = 1; l <= levels; ++l) {
      if (!g.contains(l) && b(l - 1) != 0) {
        out.ok = false;
        out.violations.push_back("group " + g.label() + ": nonzero coefficient at level " +
                                 std::to_string(l));
      }
    }
    if (k < scheme.m.size() && scheme.m[k] == 0 && b.cwiseAbs().maxCoeff() > 0) {
      out.ok = false;
      out.violations.push_back("group " + g.label() + ": nonzero coefficient without samples");
    }
    total += b;
  }
  const Real scale = std::max(Real(1), Real(scheme.alpha.cwiseAbs().maxCoeff()));
  out.residual = to_double((total - scheme.alpha).cwiseAbs().maxCoeff());
  if (!(Real(out.residual) <= Real(tol) * scale)) {
    out.ok = false;
    out.violations.push_back("sum of coefficients differs from alpha by " +
                             std::to_string(out.residual));
  }
  return out;
}

}  // namespace mlblue
