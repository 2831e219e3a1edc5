// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/analysis.hpp"

#include <cmath>
#include <map>

#include "mlblue/error.hpp"
#include "mlblue/extrapolation.hpp"
#include "mlblue/groups.hpp"

namespace mlblue {

const char* to_string(CostBranch b) {
  switch (b) {
    case CostBranch::kBelow: return "below";
    case CostBranch::kEqual: return "equal";
    case CostBranch::kAbove: return "above";
  }
  return "?";
}

const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kMc: return "mc";
    case EstimatorKind::kMlmc: return "mlmc";
    case EstimatorKind::kRe: return "re";
    case EstimatorKind::kWeightedRe: return "wre";
    case EstimatorKind::kSaob: return "saob";
  }
  return "?";
}

CostBranchPrediction predicted_cost_bound(double gamma_bias, double gamma_var, double gamma_cost,
                                          double eps) {
  if (!(gamma_bias > 0) || !(gamma_cost > 0) || !(gamma_var >= 0)) {
    throw InvalidArgument("cost bound: rates must be positive (gamma_var >= 0)");
  }
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("cost bound: eps must lie in (0, 1)");
  CostBranchPrediction out{gamma_bias, gamma_var, gamma_cost};
  out.first_exponent = -gamma_cost / gamma_bias;
  if (gamma_cost < gamma_var) {
    out.branch = CostBranch::kBelow;
    out.second_exponent = -2;
  } else if (gamma_cost == gamma_var) {
    out.branch = CostBranch::kEqual;
    out.second_exponent = -2;
    out.log_power = 2;
  } else {
    out.branch = CostBranch::kAbove;
    out.second_exponent = -2 - (gamma_cost - gamma_var) / gamma_bias;
  }
  out.value = std::pow(eps, out.first_exponent) +
              std::pow(eps, out.second_exponent) * std::pow(std::abs(std::log(eps)), out.log_power);
  return out;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidArgument("fit: at least two points are required");
  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidArgument("fit: non-finite point");
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0)) throw InvalidArgument("fit: abscissae are degenerate");
  RateFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double rss = 0;
  for (const auto& [x, y] : points) {
    const double r = y - (out.slope * x + out.intercept);
    rss += r * r;
  }
  out.residual = std::sqrt(rss / n);
  if (points.size() > 2) out.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  return out;
}

std::string EstimatorSpec::name() const {
  if (!label.empty()) return label;
  std::string out = to_string(kind);
  switch (kind) {
    case EstimatorKind::kRe: out += std::to_string(coupling); break;
    case EstimatorKind::kWeightedRe: out += std::to_string(s); break;
    case EstimatorKind::kSaob:
      if (coupling > 0) out += std::to_string(coupling);
      break;
    default: break;
  }
  if (bias == BiasTarget::kReT) out += "_v" + std::to_string(t);
  return out;
}

Vector bias_vector(const EstimatorSpec& spec, int levels, const RateVector& rates) {
  const int t = spec.bias_order();
  if (t == 2) return unit_vector(levels, levels);
  return re_vectors(levels, rates, t).at(levels);
}

EstimatorScheme build_fixed_scheme(const EstimatorSpec& spec, int levels, const RateVector& rates,
                                   const CostModel& cost) {
  const int t = spec.bias_order();
  EstimatorScheme scheme = [&] {
    switch (spec.kind) {
      case EstimatorKind::kMc:
        return mc_scheme(bias_vector(spec, levels, rates), {}, cost);
      case EstimatorKind::kMlmc:
        return t == 2 ? mlmc_scheme(levels, {}, cost)
                      : weighted_re_scheme(levels, rates, 2, t, {}, cost);
      case EstimatorKind::kRe: {
        if (spec.coupling < 2) throw InvalidArgument("estimator: re needs coupling >= 2");
        return spec.coupling == t ? re_scheme(levels, rates, t, {}, cost)
                                  : weighted_re_scheme(levels, rates, spec.coupling, t, {}, cost);
      }
      case EstimatorKind::kWeightedRe:
        return weighted_re_scheme(levels, rates, spec.s, t, {}, cost);
      case EstimatorKind::kSaob:
        break;
    }
    throw InvalidArgument("estimator: saob has no fixed coefficients");
  }();
  scheme.name = spec.name();
  return scheme;
}

LevelCost cost_at_level(const EstimatorSpec& spec, const MomentData& moments,
                        const RateVector& rates, const CostModel& cost, double target_variance,
                        const DriverOptions& opts) {
  const int levels = moments.levels();
  LevelCost out;
  std::vector<double> group_costs;
  if (spec.kind == EstimatorKind::kSaob) {
    const int q = spec.coupling > 0 ? std::min(spec.coupling, levels) : levels;
    const GroupSystem system = enumerate_groups(levels, q, cost);
    const BudgetResult br =
        budget_for_variance(system, moments.C, bias_vector(spec, levels, rates), target_variance,
                            opts.solver);
    out.allocation = br.solve.allocation;
    out.variance = to_double(br.solve.variance);
    group_costs = system.costs();
  } else {
    EstimatorScheme scheme = build_fixed_scheme(spec, levels, rates, cost);
    const double p = scheme_budget_for_variance(scheme, moments.C, target_variance);
    scheme = allocate_scheme(scheme, moments.C, p);
    out.allocation = Allocation{scheme.m, scheme_cost(scheme)};
    out.variance = to_double(scheme_variance(scheme, moments.C));
    group_costs = scheme.system.costs();
  }
  out.cost_continuous = out.allocation.cost;
  out.cost_rounded = round_allocation(out.allocation, group_costs, opts.rounding).cost;
  return out;
}

namespace {

bool mean_is_zero(const ExpansionFamily& family) {
  return family.mean().cwiseAbs().maxCoeff() == 0;
}

SweepRecord make_record(const EstimatorSpec& spec, double eps, int levels, const LevelCost& lc,
                        double bias_sq) {
  SweepRecord r;
  r.estimator = spec.name();
  r.eps = eps;
  r.levels = levels;
  r.cost_continuous = lc.cost_continuous;
  r.cost_rounded = lc.cost_rounded;
  r.variance = lc.variance;
  r.bias_sq = bias_sq;
  r.mse = bias_sq + lc.variance;
  return r;
}

}  // namespace

SweepRecord mse_target_driver(const ExpansionFamily& family, const CostModel& cost,
                              const EstimatorSpec& spec, double eps, const DriverOptions& opts) {
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidArgument("driver: eps must be positive");
  if (opts.max_levels < 1) throw InvalidArgument("driver: max_levels must be >= 1");
  const MomentData full = family_moments(family.with_levels(opts.max_levels));
  const RateVector& rates = family.rates();

  if (mean_is_zero(family)) {
    const MomentData m = full.truncated(opts.max_levels);
    const LevelCost lc = cost_at_level(spec, m, rates, cost, eps * eps, opts);
    return make_record(spec, eps, opts.max_levels, lc, 0.0);
  }
  for (int l = 1; l <= opts.max_levels; ++l) {
    const MomentData m = full.truncated(l);
    const double bias = to_double(re_bias(bias_vector(spec, l, rates), m));
    if (bias * bias <= eps * eps / 2) {
      const LevelCost lc = cost_at_level(spec, m, rates, cost, eps * eps / 2, opts);
      return make_record(spec, eps, l, lc, bias * bias);
    }
  }
  throw InfeasibleError("driver: eps = " + std::to_string(eps) + " is not reachable with L <= " +
                        std::to_string(opts.max_levels));
}

SweepRecord level_driver(const ExpansionFamily& family, const CostModel& cost,
                         const EstimatorSpec& spec, int levels, const DriverOptions& opts) {
  if (levels < 1) throw InvalidArgument("driver: levels must be >= 1");
  const MomentData m = family_moments(family.with_levels(levels));
  const double bias = to_double(re_bias(bias_vector(spec, levels, family.rates()), m));
  if (!(bias > 0)) {
    throw InfeasibleError("driver: the bias vanishes at L = " + std::to_string(levels) +
                          "; level mode needs a biased family");
  }
  const LevelCost lc = cost_at_level(spec, m, family.rates(), cost, bias * bias, opts);
  return make_record(spec, std::sqrt(2.0) * bias, levels, lc, bias * bias);
}

SweepResult cost_sweep(const ExpansionFamily& family, const CostModel& cost,
                       std::span<const EstimatorSpec> specs, const SweepPlan& plan,
                       const DriverOptions& opts) {
  if (specs.empty()) throw InvalidArgument("sweep: no estimators");
  SweepResult out;
  for (const EstimatorSpec& spec : specs) {
    std::vector<std::pair<double, double>> cont, rounded;
    auto add = [&](const SweepRecord& r) {
      out.records.push_back(r);
      cont.emplace_back(std::log(r.eps), std::log(r.cost_continuous));
      rounded.emplace_back(std::log(r.eps), std::log(r.cost_rounded));
    };
    if (plan.mode == SweepPlan::Mode::kGrid) {
      if (plan.eps_grid.empty()) throw InvalidArgument("sweep: empty eps grid");
      for (double eps : plan.eps_grid) add(mse_target_driver(family, cost, spec, eps, opts));
    } else {
      if (plan.min_level < 1 || plan.max_level < plan.min_level) {
        throw InvalidArgument("sweep: invalid level range");
      }
      for (int l = plan.min_level; l <= plan.max_level; ++l) add(level_driver(family, cost, spec, l, opts));
    }
    if (cont.size() >= 3) {
      try {
        const RateFit fc = fit_rate(cont);
        const RateFit fr = fit_rate(rounded);
        out.slopes.push_back({spec.name() + "/continuous", fc.slope, fc.slope_stderr});
        out.slopes.push_back({spec.name() + "/rounded", fr.slope, fr.slope_stderr});
      } catch (const InvalidArgument&) {
        // All records share one eps (e.g. a flat grid); no slope to report.
      }
    }
  }
  return out;
}

Real coefficient_distance(const EstimatorScheme& a, const EstimatorScheme& b) {
  if (a.system.levels() != b.system.levels()) {
    throw InvalidArgument("distance: schemes have different L");
  }
  std::map<ModelGroup, Vector> diff;
  for (std::size_t k = 0; k < a.system.size(); ++k) diff.emplace(a.system.group(k), a.betas.at(k));
  for (std::size_t k = 0; k < b.system.size(); ++k) {
    const auto [it, inserted] = diff.emplace(b.system.group(k), -b.betas.at(k));
    if (!inserted) it->second -= b.betas.at(k);
  }
  Real total = 0;
  for (const auto& [g, v] : diff) total += v.squaredNorm();
  return boost::multiprecision::sqrt(total);
}

ConvergencePoint convergence_point(const ExpansionFamily& family, const CostModel& cost, int q,
                                   double budget, const SolverOptions& opts) {
  const int levels = family.levels();
  const MomentData m = family_moments(family);
  const Vector alpha = unit_vector(levels, levels);

  ConvergencePoint out;
  out.ell0 = family.ell0();
  out.q = q;
  if (levels == 1) {
    out.var_re = out.var_saob = m.C(0, 0) * Real(cost.level_cost(1)) / Real(budget);
    return out;
  }
  const EstimatorScheme re =
      allocate_scheme(weighted_re_scheme(levels, family.rates(), q, 2, {}, cost), m.C, budget);
  out.var_re = scheme_variance(re, m.C);

  const GroupCovariance gc(enumerate_groups(levels, q, cost), m.C);
  const SaobResult sr = saob_allocate(gc, alpha, budget, opts);
  const EstimatorScheme saob = saob_scheme(gc, alpha, sr);
  out.var_saob = sr.variance;
  out.r = to_double(coefficient_distance(saob, re));
  out.e = to_double((out.var_re - out.var_saob) / out.var_saob);
  return out;
}

double coefficient_distance(const ExpansionFamily& family, const CostModel& cost, int q,
                            double budget) {
  return convergence_point(family, cost, q, budget).r;
}

double variance_gap(const ExpansionFamily& family, const CostModel& cost, int q, double budget) {
  return convergence_point(family, cost, q, budget).e;
}

std::vector<ConvergencePoint> convergence_study(const ExpansionFamily& family,
                                                const CostModel& cost,
                                                std::span<const double> ell0s,
                                                std::span<const int> qs, double budget,
                                                const SolverOptions& opts) {
  std::vector<ConvergencePoint> out;
  for (double ell0 : ell0s) {
    const ExpansionFamily f = family.with_ell0(ell0);
    for (int q : qs) out.push_back(convergence_point(f, cost, q, budget, opts));
  }
  return out;
}

bool decreasing_trend(std::span<const double> values, int allowed) {
  int ups = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) ++ups;
  }
  return ups <= allowed;
}

}  // namespace mlblue
