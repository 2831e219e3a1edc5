// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <CLI11.hpp>

#include "cli/csv.hpp"
#include "mlblue/allocation.hpp"
#include "mlblue/analysis.hpp"
#include "mlblue/blue.hpp"
#include "mlblue/error.hpp"
#include "mlblue/extrapolation.hpp"
#include "mlblue/groups.hpp"
#include "mlblue/simulation.hpp"

namespace mlblue::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDefaultBudget = 100.0;

std::string num(const Real& x) { return format_number(to_double(x)); }
std::string num(double x) { return format_number(x); }

double budget_of(const RunConfig& cfg) { return cfg.run.budget.value_or(kDefaultBudget); }

std::vector<EstimatorSpec> estimators_or(const RunConfig& cfg, std::vector<EstimatorSpec> fallback) {
  return cfg.estimators.empty() ? fallback : cfg.estimators;
}

EstimatorSpec spec(EstimatorKind kind, int coupling = 0) {
  EstimatorSpec s;
  s.kind = kind;
  s.coupling = coupling;
  if (kind == EstimatorKind::kRe) s.s = s.t = coupling, s.bias = BiasTarget::kReT;
  return s;
}

// Largest RE order the rate vector supports.
int max_re_order(const RunConfig& cfg) { return cfg.family.rates().size() + 1; }

std::vector<int> couplings_or(const RunConfig& cfg, std::vector<int> fallback) {
  return cfg.run.couplings.empty() ? fallback : cfg.run.couplings;
}

void warn_near_singular(const GroupCovariance& gc, std::ostream* log) {
  if (log == nullptr || gc.near_singular().empty()) return;
  Real worst = 0;
  for (std::size_t k : gc.near_singular()) worst = std::max(worst, gc.condition(k));
  *log << "mlblue: warning=near-singular groups=" << gc.near_singular().size()
       << " max_condition=" << num(worst) << '\n';
}

struct Allocated {
  std::string name;
  GroupSystem system;
  std::vector<Vector> betas;  // at the continuous allocation
  Allocation continuous;
  Allocation rounded;
  double var_continuous = 0;
  double var_rounded = 0;
  EstimatorScheme rounded_scheme;
};

Allocated allocate_estimator(const EstimatorSpec& spec, const RunConfig& cfg,
                             const MomentData& moments, double p, RoundingPolicy policy,
                             std::ostream* log) {
  const int levels = moments.levels();
  const RateVector& rates = cfg.family.rates();
  if (spec.kind == EstimatorKind::kSaob) {
    const int q = spec.coupling > 0 ? std::min(spec.coupling, levels) : levels;
    const GroupCovariance gc(enumerate_groups(levels, q, cfg.cost), moments.C);
    warn_near_singular(gc, log);
    const Vector alpha = bias_vector(spec, levels, rates);
    const SaobResult sr = saob_allocate(gc, alpha, p);
    const EstimatorScheme cont = saob_scheme(gc, alpha, sr);
    const Allocation rounded = round_allocation(sr.allocation, gc.system().costs(), policy);
    EstimatorScheme rs{spec.name(), gc.system(), extract_beta(gc, rounded.m, alpha), rounded.m,
                       alpha, {}};
    const double vr = to_double(blue_variance(gc.psi(std::span<const double>(rounded.m)), alpha));
    return Allocated{spec.name(), gc.system(), cont.betas, sr.allocation, rounded,
                     to_double(sr.variance), vr, std::move(rs)};
  }
  EstimatorScheme scheme = build_fixed_scheme(spec, levels, rates, cfg.cost);
  scheme = allocate_scheme(scheme, moments.C, p);
  const Allocation cont{scheme.m, scheme_cost(scheme)};
  // Threshold 0 keeps every group with a nonzero coefficient sampled.
  const Allocation rounded = round_allocation(cont, scheme.system.costs(), policy, 0.0);
  EstimatorScheme rs = scheme;
  rs.m = rounded.m;
  return Allocated{spec.name(), scheme.system, scheme.betas, cont, rounded,
                   to_double(scheme_variance(scheme, moments.C)),
                   to_double(scheme_variance(rs, moments.C)), std::move(rs)};
}

std::vector<std::string> beta_header(int levels) {
  std::vector<std::string> h{"group_id", "models"};
  for (int l = 1; l <= levels; ++l) h.push_back("beta_" + std::to_string(l));
  return h;
}

}  // namespace

std::vector<fs::path> cmd_moments(const CommandContext& ctx) {
  const MomentData m = family_moments(ctx.config.family);
  const int levels = m.levels();
  std::vector<std::string> header{"level", "mu", "truth_mean"};
  for (int j = 1; j <= levels; ++j) header.push_back("c_" + std::to_string(j));
  const fs::path path = ctx.out_dir / "moments.csv";
  CsvWriter csv(path, header);
  for (int l = 1; l <= levels; ++l) {
    std::vector<std::string> row{std::to_string(l), num(m.mu(l - 1)), num(m.truth_mean)};
    for (int j = 1; j <= levels; ++j) row.push_back(num(m.C(l - 1, j - 1)));
    csv.row(row);
  }
  return {path};
}

std::vector<fs::path> cmd_allocate(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const MomentData m = family_moments(cfg.family);
  std::vector<fs::path> written;
  for (const EstimatorSpec& spec : estimators_or(cfg, {mlblue::cli::spec(EstimatorKind::kSaob)})) {
    const Allocated a = allocate_estimator(spec, cfg, m, budget_of(cfg), cfg.run.rounding, ctx.log);
    const fs::path path = ctx.out_dir / ("allocation_" + a.name + ".csv");
    CsvWriter csv(path, {"group_id", "models", "m_continuous", "m_rounded", "W_k"});
    for (std::size_t k = 0; k < a.system.size(); ++k) {
      csv.row({std::to_string(k + 1), a.system.group(k).label(), num(a.continuous.m[k]),
               num(a.rounded.m[k]), num(a.system.cost(k))});
    }
    const fs::path spath = ctx.out_dir / ("allocation_" + a.name + "_summary.csv");
    CsvWriter summary(spath, {"variance_continuous", "variance_rounded_predicted",
                              "cost_continuous", "cost_rounded"});
    summary.row({num(a.var_continuous), num(a.var_rounded), num(a.continuous.cost),
                 num(a.rounded.cost)});
    written.push_back(path);
    written.push_back(spath);
  }
  return written;
}

std::vector<fs::path> cmd_schemes(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const int levels = cfg.family.levels();
  std::vector<fs::path> written;

  std::vector<int> orders;
  for (int q = 2; q <= std::min(4, max_re_order(cfg)); ++q) orders.push_back(q);
  orders = couplings_or(cfg, orders);
  {
    std::vector<std::string> header{"k", "q"};
    for (int l = 1; l <= levels; ++l) header.push_back("v_" + std::to_string(l));
    const fs::path path = ctx.out_dir / "coefficients.csv";
    CsvWriter csv(path, header);
    for (int q : orders) {
      if (q < 2) continue;
      const RECoefficients v = re_vectors(levels, cfg.family.rates(), q);
      for (int k = 0; k <= levels; ++k) {
        std::vector<std::string> row{std::to_string(k), std::to_string(q)};
        for (int l = 1; l <= levels; ++l) row.push_back(num(v.at(k)(l - 1)));
        csv.row(row);
      }
    }
    written.push_back(path);
  }

  std::vector<EstimatorSpec> fallback{spec(EstimatorKind::kMlmc)};
  if (max_re_order(cfg) >= 3 && levels >= 2) fallback.push_back(spec(EstimatorKind::kRe, 3));
  const MomentData m = family_moments(cfg.family);
  for (const EstimatorSpec& s : estimators_or(cfg, fallback)) {
    const Allocated a = allocate_estimator(s, cfg, m, budget_of(cfg), cfg.run.rounding, ctx.log);
    EstimatorScheme check{a.name, a.system, a.betas, a.continuous.m,
                          bias_vector(s, levels, cfg.family.rates()), {}};
    const UnbiasedCheck uc = check_unbiased(check, 1e-8);
    if (!uc.ok) throw NumericalError("scheme " + a.name + " is not unbiased: " + uc.violations.front());
    const fs::path path = ctx.out_dir / ("beta_" + a.name + ".csv");
    CsvWriter csv(path, beta_header(levels));
    for (std::size_t k = 0; k < a.system.size(); ++k) {
      std::vector<std::string> row{std::to_string(k + 1), a.system.group(k).label()};
      for (int l = 1; l <= levels; ++l) row.push_back(num(a.betas[k](l - 1)));
      csv.row(row);
    }
    written.push_back(path);
  }
  return written;
}

std::vector<fs::path> cmd_sweep(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  SweepPlan plan;
  plan.mode = cfg.run.sweep_mode;
  if (plan.mode == SweepPlan::Mode::kGrid) {
    plan.eps_grid = cfg.run.eps_grid;
    if (plan.eps_grid.empty() && cfg.run.eps) plan.eps_grid = {*cfg.run.eps};
    if (plan.eps_grid.empty()) throw ConfigError("run.eps_grid", "sweep needs eps_grid or eps");
  } else {
    plan.min_level = cfg.run.min_level;
    plan.max_level = cfg.run.max_level;
  }
  DriverOptions opts;
  opts.max_levels = cfg.run.max_levels;
  opts.rounding = cfg.run.rounding;
  const std::vector<EstimatorSpec> specs = estimators_or(
      cfg, {spec(EstimatorKind::kMc), spec(EstimatorKind::kMlmc), spec(EstimatorKind::kSaob)});
  const SweepResult res = cost_sweep(cfg.family, cfg.cost, specs, plan, opts);

  const fs::path path = ctx.out_dir / "sweep.csv";
  CsvWriter csv(path, {"estimator", "eps", "L", "cost_continuous", "cost_rounded", "variance",
                       "bias_sq", "mse"});
  for (const SweepRecord& r : res.records) {
    csv.row({r.estimator, num(r.eps), std::to_string(r.levels), num(r.cost_continuous),
             num(r.cost_rounded), num(r.variance), num(r.bias_sq), num(r.mse)});
  }
  const fs::path spath = ctx.out_dir / "slopes.csv";
  CsvWriter slopes(spath, {"estimator", "slope", "stderr"});
  for (const SlopeRecord& s : res.slopes) slopes.row({s.estimator, num(s.slope), num(s.slope_stderr)});
  return {path, spath};
}

std::vector<fs::path> cmd_convergence(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const std::vector<int> qs = couplings_or(cfg, {2, 3, 4});
  for (int q : qs) {
    if (q < 2 || q > max_re_order(cfg)) {
      throw ConfigError("run.couplings", "order " + std::to_string(q) + " is not supported by the rates");
    }
  }
  const std::vector<ConvergencePoint> pts =
      convergence_study(cfg.family, cfg.cost, cfg.run.ell0s, qs, budget_of(cfg));
  const fs::path path = ctx.out_dir / "convergence.csv";
  CsvWriter csv(path, {"ell0", "q", "r_q", "e_q"});
  for (const ConvergencePoint& p : pts) {
    csv.row({num(p.ell0), std::to_string(p.q), num(p.r), num(p.e)});
  }
  return {path};
}

std::vector<fs::path> cmd_simulate(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const MomentData m = family_moments(cfg.family);
  const fs::path path = ctx.out_dir / "simulate.csv";
  CsvWriter csv(path, {"estimator", "R", "mean_emp", "var_emp", "var_analytic", "mse_emp",
                       "mse_analytic", "z_score"});
  for (const EstimatorSpec& s :
       estimators_or(cfg, {spec(EstimatorKind::kMc), spec(EstimatorKind::kMlmc)})) {
    // Simulation needs whole sample counts regardless of the configured policy.
    const Allocated a = allocate_estimator(s, cfg, m, budget_of(cfg), RoundingPolicy::kCeil, ctx.log);
    const SimulationReport rep =
        run_estimator(a.rounded_scheme, cfg.family, cfg.run.seed, cfg.run.replications, cfg.run.threads);
    csv.row({a.name, std::to_string(rep.replications), num(rep.mean_emp), num(rep.var_emp),
             num(rep.var_analytic), num(rep.mse_emp), num(rep.mse_analytic), num(rep.z_score)});
  }
  return {path};
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '"') c = '\'';
    if (c == '\n') c = ' ';
  }
  return s;
}

void report(std::ostream& err, const char* kind, const std::string& path, const std::string& msg) {
  err << "mlblue: error=" << kind << " path=" << (path.empty() ? "-" : path) << " msg=\""
      << sanitize(msg) << "\"\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel best linear unbiased estimators"};
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<long long> seed;
  std::optional<unsigned> threads;
  app.add_option("command", command, "moments | allocate | schemes | sweep | convergence | simulate")
      ->required()
      ->check(CLI::IsMember({"moments", "allocate", "schemes", "sweep", "convergence", "simulate"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seed", seed, "overrides run.seed");
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "usage", "", e.what());
    return kExitConfig;
  }

  try {
    CommandContext ctx{load_config(config_path), fs::path(out_dir), &err};
    if (seed) {
      if (*seed < 0) throw ConfigError("--seed", "must be >= 0");
      ctx.config.run.seed = static_cast<std::uint64_t>(*seed);
    }
    if (threads) ctx.config.run.threads = *threads;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError("--out", "cannot create output directory: " + ec.message());

    std::vector<fs::path> files;
    if (command == "moments") files = cmd_moments(ctx);
    else if (command == "allocate") files = cmd_allocate(ctx);
    else if (command == "schemes") files = cmd_schemes(ctx);
    else if (command == "sweep") files = cmd_sweep(ctx);
    else if (command == "convergence") files = cmd_convergence(ctx);
    else files = cmd_simulate(ctx);
    for (const fs::path& f : files) out << f.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    report(err, "config", e.path(), e.what());
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    report(err, "config", "", e.what());
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    report(err, "infeasible", "", e.what());
    return kExitInfeasible;
  } catch (const NumericalError& e) {
    report(err, "numerical", "", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    report(err, "io", "", e.what());
    return kExitConfig;
  }
}

}  // namespace mlblue::cli
