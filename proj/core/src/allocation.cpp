// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>

#include <Eigen/Cholesky>

#include "mlblue/linalg.hpp"

namespace mlblue {

namespace {

using boost::multiprecision::sqrt;

// Mass kept on singleton groups while iterating so that Psi stays regular.
constexpr double kSingletonFloor = 1e-12;
// Fractions below this after the multiplicative phase start out inactive.
constexpr double kInitialDrop = 1e-10;
constexpr int kMultiplicativeIters = 400;
constexpr double kMultiplicativeStop = 1e-7;
// Residual accepted when the line search can no longer make progress.
constexpr double kPrecisionFloorKkt = 1e-6;

struct Point {
  std::vector<Real> b;
  Real f = 0;
  Vector x;  // Psi(b)^{-1} alpha
  std::vector<Real> d;  // d_k = x^T M_k x / W_k = -dF/db_k
};

class Objective {
 public:
  Objective(const GroupCovariance& gc, const Vector& alpha) : gc_(gc), alpha_(alpha) {
    for (double w : gc.system().costs()) w_.emplace_back(w);
  }

  [[nodiscard]] std::size_t size() const { return w_.size(); }
  [[nodiscard]] const Real& cost(std::size_t k) const { return w_[k]; }

  // Returns nullopt when Psi(b) is not numerically SPD.
  [[nodiscard]] std::optional<Point> evaluate(const std::vector<Real>& b) const {
    std::vector<Real> weights(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) weights[k] = b[k] / w_[k];
    try {
      const SpdFactor factor(gc_.psi(std::span<const Real>(weights)), "Psi");
      Point p;
      p.b = b;
      p.x = factor.solve(alpha_);
      p.f = alpha_.dot(p.x);
      if (!(p.f > 0)) return std::nullopt;
      p.d.resize(b.size());
      for (std::size_t k = 0; k < b.size(); ++k) p.d[k] = gc_.quadratic(k, p.x) / w_[k];
      return p;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }

  // Hessian of F restricted to the index set, H_ij = 2 u_i^T Psi^{-1} u_j with
  // u_k = M_k x / W_k.
  [[nodiscard]] Matrix hessian(const Point& p, const std::vector<std::size_t>& idx) const {
    std::vector<Real> weights(p.b.size());
    for (std::size_t k = 0; k < p.b.size(); ++k) weights[k] = p.b[k] / w_[k];
    const SpdFactor factor(gc_.psi(std::span<const Real>(weights)), "Psi");
    Matrix u(gc_.levels(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      u.col(static_cast<Eigen::Index>(i)) = gc_.apply(idx[i], p.x) / w_[idx[i]];
    }
    const Matrix v = factor.solve(u);
    Matrix h = 2 * u.transpose() * v;
    return (h + h.transpose()) / 2;
  }

 private:
  const GroupCovariance& gc_;
  const Vector& alpha_;
  std::vector<Real> w_;
};

bool covers_all_levels(const GroupSystem& system) {
  std::vector<bool> seen(static_cast<std::size_t>(system.levels()), false);
  for (const auto& g : system.groups())
    for (int l : g.levels()) seen[static_cast<std::size_t>(l - 1)] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

void normalize(std::vector<Real>& b) {
  Real total = 0;
  for (const Real& x : b) total += x;
  for (Real& x : b) x /= total;
}

// Scaled KKT residual: active groups need d_k / F = 1, inactive ones <= 1.
double kkt_residual(const Point& p, const std::vector<bool>& active) {
  Real worst = 0;
  for (std::size_t k = 0; k < p.b.size(); ++k) {
    const Real e = p.d[k] / p.f;
    const Real viol = active[k] ? Real(abs(e - 1)) : std::max(Real(0), Real(e - 1));
    worst = std::max(worst, viol);
  }
  return to_double(worst);
}

// Budget fractions of the MLMC-style allocation ({1} and {k-1,k}), if all of
// those groups exist in the system.
std::optional<std::vector<Real>> mlmc_fractions(const GroupCovariance& gc) {
  const GroupSystem& system = gc.system();
  const int levels = system.levels();
  const Matrix& c = gc.covariance();
  std::vector<Real> b(system.size(), Real(0));
  for (int k = 1; k <= levels; ++k) {
    const auto idx = system.find(k == 1 ? ModelGroup({1}) : ModelGroup({k - 1, k}));
    if (!idx) return std::nullopt;
    Real var = c(k - 1, k - 1);
    if (k > 1) var += c(k - 2, k - 2) - 2 * c(k - 1, k - 2);
    b[*idx] = sqrt(std::max(var, Real(0)) * Real(system.cost(*idx)));
  }
  Real total = 0;
  for (const Real& x : b) total += x;
  if (!(total > 0)) return std::nullopt;
  for (Real& x : b) x /= total;
  return b;
}

SaobResult make_result(const Objective& obj, const Point& p, double budget, int iterations,
                       double kkt) {
  SaobResult r;
  r.fractions.resize(p.b.size());
  r.allocation.m.resize(p.b.size());
  for (std::size_t k = 0; k < p.b.size(); ++k) {
    r.fractions[k] = to_double(p.b[k]);
    r.allocation.m[k] = to_double(Real(budget) * p.b[k] / obj.cost(k));
  }
  r.allocation.cost = 0;
  for (std::size_t k = 0; k < p.b.size(); ++k) r.allocation.cost += r.allocation.m[k] * to_double(obj.cost(k));
  r.variance = p.f / Real(budget);
  r.iterations = iterations;
  r.kkt_residual = kkt;
  return r;
}

}  // namespace

ClosedFormResult closed_form_allocation(std::span<const Real> sigma2, std::span<const double> costs,
                                        double p) {
  if (sigma2.size() != costs.size() || sigma2.empty()) {
    throw InvalidArgument("closed form: need one variance and one cost per group");
  }
  if (!(p > 0) || !std::isfinite(p)) throw InvalidArgument("closed form: budget must be positive");
  Real total = 0;
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    if (!(costs[k] > 0)) throw InvalidArgument("closed form: costs must be positive");
    if (sigma2[k] < 0) throw InvalidArgument("closed form: variances must be nonnegative");
    total += sqrt(sigma2[k] * Real(costs[k]));
  }
  if (!(total > 0)) throw InvalidArgument("closed form: all group variances vanish");
  ClosedFormResult out;
  out.allocation.m.resize(sigma2.size());
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    out.allocation.m[k] = to_double(Real(p) * sqrt(sigma2[k] / Real(costs[k])) / total);
  }
  out.allocation.cost = allocation_cost(out.allocation.m, costs);
  out.objective = total * total / Real(p);
  return out;
}

SaobResult saob_allocate(const GroupCovariance& gc, const Vector& alpha, double p,
                         const SolverOptions& opts) {
  if (!(p > 0) || !std::isfinite(p)) throw InvalidArgument("saob: budget must be positive");
  if (alpha.size() != gc.levels()) throw InvalidArgument("saob: alpha must have length L");
  if (!(alpha.cwiseAbs().maxCoeff() > 0)) throw InvalidArgument("saob: alpha must be nonzero");
  if (!covers_all_levels(gc.system())) {
    throw InfeasibleError("saob: the admissible groups do not cover every level");
  }
  const Objective obj(gc, alpha);
  const std::size_t n = obj.size();

  std::vector<Real> lb(n, Real(0));
  for (std::size_t k = 0; k < n; ++k) {
    if (gc.system().group(k).size() == 1) lb[k] = kSingletonFloor;
  }

  // Initial point: half MLMC-style, half uniform.
  std::vector<Real> b0(n, Real(1) / Real(n));
  Real init_variance = 0;
  if (const auto mlmc = mlmc_fractions(gc)) {
    if (const auto pm = obj.evaluate(*mlmc)) init_variance = pm->f / Real(p);
    for (std::size_t k = 0; k < n; ++k) b0[k] = ((*mlmc)[k] + b0[k]) / 2;
  }
  std::optional<Point> cur = obj.evaluate(b0);
  if (!cur) throw NumericalError("saob: Psi is singular at the initial allocation");

  int iterations = 0;
  // Phase 1: alternating minimization b_k <- b_k sqrt(d_k), which decreases F
  // monotonically (fixed-coefficient optimum for the current coefficients).
  for (int it = 0; it < kMultiplicativeIters && iterations < opts.max_iters; ++it, ++iterations) {
    std::vector<Real> nb(n);
    for (std::size_t k = 0; k < n; ++k) nb[k] = cur->b[k] * sqrt(std::max(cur->d[k], Real(0)));
    normalize(nb);
    for (std::size_t k = 0; k < n; ++k) nb[k] = std::max(nb[k], lb[k]);
    normalize(nb);
    auto next = obj.evaluate(nb);
    if (!next || !(next->f < cur->f)) break;
    const Real improvement = (cur->f - next->f) / cur->f;
    cur = std::move(next);
    if (improvement < Real(kMultiplicativeStop)) break;
  }

  // Phase 2: active-set projected Newton on the simplex.
  std::vector<bool> active(n, false);
  {
    std::vector<Real> nb = cur->b;
    Real largest = *std::max_element(nb.begin(), nb.end());
    for (std::size_t k = 0; k < n; ++k) {
      active[k] = nb[k] > std::max(lb[k], Real(kInitialDrop) * largest);
      if (!active[k]) nb[k] = lb[k];
    }
    normalize(nb);
    if (auto np = obj.evaluate(nb); np && np->f <= cur->f * (1 + Real(1e-9))) cur = std::move(np);
    else for (std::size_t k = 0; k < n; ++k) active[k] = cur->b[k] > lb[k];
  }

  Point best = *cur;
  double best_kkt = kkt_residual(best, active);
  bool converged = false;
  int stalled = 0;
  for (; iterations < opts.max_iters; ++iterations) {
    const double kkt = kkt_residual(*cur, active);
    if (cur->f < best.f || (cur->f == best.f && kkt < best_kkt)) {
      best = *cur;
      best_kkt = kkt;
    }
    if (kkt <= opts.kkt_tol) {
      converged = true;
      break;
    }

    // Stationarity on the free set and the worst bound violation.
    Real stat = 0;
    Real worst_viol = 0;
    std::size_t worst_k = n;
    for (std::size_t k = 0; k < n; ++k) {
      const Real e = cur->d[k] / cur->f;
      if (active[k]) {
        stat = std::max(stat, Real(abs(e - 1)));
      } else if (e - 1 > worst_viol) {
        worst_viol = e - 1;
        worst_k = k;
      }
    }
    if (worst_k < n && worst_viol > Real(opts.kkt_tol) && stat < worst_viol / 2) {
      active[worst_k] = true;
    }

    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n; ++k)
      if (active[k]) idx.push_back(k);
    if (idx.size() < 2) {
      // Nothing can move; only a release could help and none qualifies.
      converged = kkt <= kPrecisionFloorKkt;
      break;
    }

    // Null-space parametrization of sum(delta) = 0 around the largest free fraction.
    const std::size_t piv_pos = static_cast<std::size_t>(
        std::max_element(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return cur->b[a] < cur->b[b]; }) -
        idx.begin());
    const Matrix h = obj.hessian(*cur, idx);
    const Eigen::Index nf = static_cast<Eigen::Index>(idx.size()) - 1;
    Matrix hz(nf, nf);
    Vector gz(nf);
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (i != piv_pos) others.push_back(i);
    const Eigen::Index r = static_cast<Eigen::Index>(piv_pos);
    for (Eigen::Index i = 0; i < nf; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(others[static_cast<std::size_t>(i)]);
      gz(i) = -cur->d[idx[static_cast<std::size_t>(ii)]] + cur->d[idx[piv_pos]];
      for (Eigen::Index j = 0; j < nf; ++j) {
        const Eigen::Index jj = static_cast<Eigen::Index>(others[static_cast<std::size_t>(j)]);
        hz(i, j) = h(ii, jj) - h(ii, r) - h(r, jj) + h(r, r);
      }
    }
    Vector y;
    {
      const Real scale = std::max(Real(hz.diagonal().cwiseAbs().maxCoeff()), Real(1e-300));
      Real mu = 0;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Matrix a = hz;
        a.diagonal().array() += mu;
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() == Eigen::Success) {
          y = llt.solve(Vector(-gz));
          if (y.allFinite() && y.dot(gz) < 0) break;
        }
        y.resize(0);
        mu = mu == 0 ? scale * Real(1e-14) : mu * 100;
      }
      if (y.size() == 0) y = -gz;  // steepest descent fallback
    }
    std::vector<Real> delta(n, Real(0));
    Real piv_delta = 0;
    for (Eigen::Index i = 0; i < nf; ++i) {
      delta[idx[others[static_cast<std::size_t>(i)]]] = y(i);
      piv_delta -= y(i);
    }
    delta[idx[piv_pos]] = piv_delta;
    Real slope = 0;
    for (std::size_t k = 0; k < n; ++k) slope -= cur->d[k] * delta[k];

    // Ratio test against the lower bounds.
    Real t_max = 1;
    std::size_t blocking = n;
    for (std::size_t k : idx) {
      if (delta[k] < 0) {
        const Real t = (cur->b[k] - lb[k]) / -delta[k];
        if (t < t_max) {
          t_max = t;
          blocking = k;
        }
      }
    }
    Real t = t_max;
    std::optional<Point> next;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<Real> nb(n);
      for (std::size_t k = 0; k < n; ++k) nb[k] = std::max(lb[k], cur->b[k] + t * delta[k]);
      if (t == t_max && blocking < n) nb[blocking] = lb[blocking];
      normalize(nb);
      next = obj.evaluate(nb);
      if (next && next->f <= cur->f + Real(1e-4) * t * slope) break;
      next.reset();
      t /= 2;
    }
    if (!next) {
      converged = kkt <= kPrecisionFloorKkt;
      break;
    }
    if (t == t_max && blocking < n) active[blocking] = false;
    const Real improvement = (cur->f - next->f) / cur->f;
    cur = std::move(next);
    if (improvement < Real(opts.rel_tol)) {
      if (++stalled >= 5) {
        ++iterations;
        const double k2 = kkt_residual(*cur, active);
        if (cur->f < best.f) {
          best = *cur;
          best_kkt = k2;
        }
        converged = std::min(k2, best_kkt) <= kPrecisionFloorKkt;
        break;
      }
    } else {
      stalled = 0;
    }
  }
  if (cur->f < best.f) {
    best = *cur;
    best_kkt = kkt_residual(best, active);
  }

  // Report: drop groups below the activity threshold if that costs nothing.
  {
    std::vector<Real> nb = best.b;
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (nb[k] > 0 && nb[k] < Real(opts.activity)) {
        nb[k] = 0;
        changed = true;
      }
    }
    if (changed) {
      normalize(nb);
      if (auto np = obj.evaluate(nb); np && np->f <= best.f * (1 + Real(1e-12))) {
        std::vector<bool> act(n);
        for (std::size_t k = 0; k < n; ++k) act[k] = nb[k] > 0;
        best_kkt = kkt_residual(*np, act);
        best = std::move(*np);
      }
    }
  }

  SaobResult result = make_result(obj, best, p, iterations, best_kkt);
  result.init_variance = init_variance;
  if (init_variance > 0 && init_variance < result.variance) {
    // Cannot happen for a converged convex solve; keep the better point anyway.
    if (const auto mlmc = mlmc_fractions(gc)) {
      if (const auto pm = obj.evaluate(*mlmc)) {
        std::vector<bool> act(n);
        for (std::size_t k = 0; k < n; ++k) act[k] = (*mlmc)[k] > 0;
        result = make_result(obj, *pm, p, iterations, kkt_residual(*pm, act));
        result.init_variance = init_variance;
      }
    }
  }
  if (!converged) {
    throw SaobNotConverged("saob: no convergence after " + std::to_string(iterations) +
                               " iterations (KKT residual " + std::to_string(result.kkt_residual) +
                               ")",
                           result);
  }
  return result;
}

SaobResult saob_allocate(const GroupSystem& system, const Matrix& c, const Vector& alpha, double p,
                         const SolverOptions& opts) {
  return saob_allocate(GroupCovariance(system, c), alpha, p, opts);
}

EstimatorScheme saob_scheme(const GroupCovariance& gc, const Vector& alpha,
                            const SaobResult& result) {
  return EstimatorScheme{"saob", gc.system(), extract_beta(gc, result.allocation.m, alpha),
                         result.allocation.m, alpha, {}};
}

Allocation round_allocation(const Allocation& alloc, std::span<const double> costs,
                            RoundingPolicy policy, double threshold) {
  Allocation out = alloc;
  if (policy == RoundingPolicy::kCeil) {
    for (double& m : out.m) m = m > threshold ? std::ceil(m) : 0.0;
  }
  out.cost = allocation_cost(out.m, costs);
  return out;
}

BudgetResult budget_for_variance(const GroupCovariance& gc, const Vector& alpha,
                                 double target_variance, const SolverOptions& opts) {
  if (!(target_variance > 0) || !std::isfinite(target_variance)) {
    throw InvalidArgument("budget: target variance must be positive");
  }
  const SaobResult unit = saob_allocate(gc, alpha, 1.0, opts);
  const Real budget = unit.variance / Real(target_variance);
  BudgetResult out;
  out.budget = to_double(budget);
  out.solve = unit;
  for (double& m : out.solve.allocation.m) m = to_double(Real(m) * budget);
  out.solve.allocation.cost = allocation_cost(out.solve.allocation.m, gc.system().costs());
  out.solve.variance = unit.variance / budget;
  out.solve.init_variance = unit.init_variance / budget;
  return out;
}

BudgetResult budget_for_variance(const GroupSystem& system, const Matrix& c, const Vector& alpha,
                                 double target_variance, const SolverOptions& opts) {
  return budget_for_variance(GroupCovariance(system, c), alpha, target_variance, opts);
}

EstimatorScheme allocate_scheme(const EstimatorScheme& scheme, const Matrix& c, double p) {
  const std::vector<Real> sigma2 = group_variances(scheme, c);
  const ClosedFormResult cf = closed_form_allocation(sigma2, scheme.system.costs(), p);
  EstimatorScheme out = scheme;
  out.m = cf.allocation.m;
  return out;
}

double scheme_budget_for_variance(const EstimatorScheme& scheme, const Matrix& c,
                                  double target_variance) {
  if (!(target_variance > 0) || !std::isfinite(target_variance)) {
    throw InvalidArgument("budget: target variance must be positive");
  }
  const std::vector<Real> sigma2 = group_variances(scheme, c);
  Real total = 0;
  for (std::size_t k = 0; k < sigma2.size(); ++k) total += sqrt(sigma2[k] * Real(scheme.system.cost(k)));
  if (!(total > 0)) throw InvalidArgument("budget: all group variances vanish");
  return to_double(total * total / Real(target_variance));
}

}  // namespace mlblue
