// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "mlblue/error.hpp"

namespace mlblue {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

namespace {

struct GroupPlan {
  std::vector<int> levels;  // zero-based
  std::vector<double> beta;  // coefficients on those levels
  std::size_t m = 0;
};

std::vector<GroupPlan> make_plan(const EstimatorScheme& scheme) {
  if (scheme.m.size() != scheme.system.size() || scheme.betas.size() != scheme.system.size()) {
    throw InvalidArgument("simulation: scheme needs one count and one beta per group");
  }
  const UnbiasedCheck check = check_unbiased(scheme);
  if (!check.ok) throw InvalidArgument("simulation: scheme fails the unbiasedness check");
  std::vector<GroupPlan> plan;
  for (std::size_t k = 0; k < scheme.system.size(); ++k) {
    const double m = scheme.m[k];
    if (!(m >= 0) || std::floor(m) != m || m > 4294967295.0) {
      throw InvalidArgument("simulation: sample counts must be nonnegative integers");
    }
    GroupPlan g;
    g.m = static_cast<std::size_t>(m);
    for (int l : scheme.system.group(k).levels()) {
      g.levels.push_back(l - 1);
      g.beta.push_back(to_double(scheme.betas[k](l - 1)));
    }
    plan.push_back(std::move(g));
  }
  return plan;
}

double one_replication(const std::vector<GroupPlan>& plan, const PathSampler& sampler,
                       std::uint64_t seed, std::size_t r, std::vector<double>& normals,
                       std::vector<double>& values) {
  CompensatedSum total;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const GroupPlan& g = plan[k];
    if (g.m == 0) continue;
    CompensatedSum group_sum;
    for (std::size_t i = 0; i < g.m; ++i) {
      GaussianStream stream(event_stream(seed, r, k, i));
      stream.fill(normals);
      (void)sampler.evaluate(normals, values);
      double term = 0;
      for (std::size_t j = 0; j < g.levels.size(); ++j) {
        term += g.beta[j] * values[static_cast<std::size_t>(g.levels[j])];
      }
      group_sum.add(term);
    }
    total.add(group_sum.value() / static_cast<double>(g.m));
  }
  return total.value();
}

}  // namespace

std::vector<double> replicate_estimates(const EstimatorScheme& scheme,
                                        const ExpansionFamily& family, std::uint64_t seed,
                                        std::size_t replications, unsigned threads) {
  if (replications == 0) throw InvalidArgument("simulation: replications must be >= 1");
  if (family.levels() != scheme.system.levels()) {
    throw InvalidArgument("simulation: family and scheme have different L");
  }
  if (replications > 4294967296ULL) throw InvalidArgument("simulation: too many replications");
  const std::vector<GroupPlan> plan = make_plan(scheme);
  const PathSampler sampler(family);
  std::vector<double> out(replications);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replications));
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> normals(static_cast<std::size_t>(sampler.normals_per_event()));
    std::vector<double> values(static_cast<std::size_t>(sampler.levels()));
    for (std::size_t r = begin; r < end; ++r) out[r] = one_replication(plan, sampler, seed, r, normals, values);
  };
  if (threads <= 1) {
    work(0, replications);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (replications + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(replications, t * chunk);
    const std::size_t end = std::min(replications, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SimulationReport run_estimator(const EstimatorScheme& scheme, const ExpansionFamily& family,
                               std::uint64_t seed, std::size_t replications, unsigned threads) {
  if (replications < 2) throw InvalidArgument("simulation: replications must be >= 2");
  const std::vector<double> est = replicate_estimates(scheme, family, seed, replications, threads);
  const MomentData moments = family_moments(family);

  SimulationReport rep;
  rep.replications = replications;
  rep.target = to_double(scheme.alpha.dot(moments.mu));
  rep.truth = to_double(moments.truth_mean);
  rep.var_analytic = to_double(scheme_variance(scheme, moments.C));
  const double n = static_cast<double>(replications);

  CompensatedSum sum;
  for (double x : est) sum.add(x);
  rep.mean_emp = sum.value() / n;
  CompensatedSum ss, se, se2;
  for (double x : est) {
    ss.add((x - rep.mean_emp) * (x - rep.mean_emp));
    const double err2 = (x - rep.truth) * (x - rep.truth);
    se.add(err2);
  }
  rep.var_emp = ss.value() / (n - 1);
  rep.mse_emp = se.value() / n;
  for (double x : est) {
    const double err2 = (x - rep.truth) * (x - rep.truth);
    se2.add((err2 - rep.mse_emp) * (err2 - rep.mse_emp));
  }
  rep.mse_stderr = std::sqrt(se2.value() / (n - 1) / n);
  const double bias = rep.target - rep.truth;
  rep.mse_analytic = bias * bias + rep.var_analytic;
  rep.z_score = rep.var_analytic > 0 ? (rep.mean_emp - rep.target) / std::sqrt(rep.var_analytic / n) : 0.0;
  rep.variance_ratio = rep.var_analytic > 0 ? rep.var_emp / rep.var_analytic : 0.0;
  return rep;
}

SimulationReport mse_report(const EstimatorScheme& scheme, const ExpansionFamily& family,
                            std::uint64_t seed, std::size_t replications, unsigned threads) {
  return run_estimator(scheme, family, seed, replications, threads);
}

bool mse_consistent(const SimulationReport& report, double nsigma) {
  return std::abs(report.mse_emp - report.mse_analytic) <= nsigma * report.mse_stderr;
}

}  // namespace mlblue
