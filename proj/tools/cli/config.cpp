// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mlblue/error.hpp"

namespace mlblue::cli {

namespace {

using nlohmann::json;

// Typed access to one JSON object; remembers which keys were read so that
// finish() can reject the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[nodiscard]] std::string path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[nodiscard]] bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  [[nodiscard]] const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key), "required field is missing");
    return j_.at(key);
  }

  [[nodiscard]] double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key), "expected a finite number");
    return x;
  }
  [[nodiscard]] double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  [[nodiscard]] long long integer(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    throw ConfigError(path(key), "expected an integer");
  }
  [[nodiscard]] long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  [[nodiscard]] std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(path(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int positive_int(Section& s, const std::string& key, long long fallback, long long lo = 1) {
  const long long v = s.integer(key, fallback);
  if (v < lo || v > 1'000'000'000) {
    throw ConfigError(s.path(key), "must be >= " + std::to_string(lo));
  }
  return static_cast<int>(v);
}

Matrix parse_q(Section& s, int order) {
  const std::string key = "Q";
  if (!s.has(key)) return toy_exp_covariance(order);
  const json& v = s.raw(key);
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "toy-exp") return toy_exp_covariance(order);
    if (name == "identity") return Matrix::Identity(order, order);
    throw ConfigError(s.path(key), "unknown preset '" + name + "' (toy-exp, identity)");
  }
  const std::vector<double> flat = s.numbers(key);
  if (flat.size() != static_cast<std::size_t>(order) * static_cast<std::size_t>(order)) {
    throw ConfigError(s.path(key), "expected " + std::to_string(order * order) +
                                       " entries (row-major " + std::to_string(order) + "x" +
                                       std::to_string(order) + ")");
  }
  Matrix q(order, order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) q(i, j) = flat[static_cast<std::size_t>(i * order + j)];
  return q;
}

ExpansionFamily parse_family(const json& j) {
  Section s(j, "family");
  const int levels = positive_int(s, "levels", 4);
  const std::vector<double> rates = s.has("rates") ? s.numbers("rates") : std::vector<double>{0, 1, 2, 3};
  RateVector rv;
  try {
    rv = RateVector(rates);
  } catch (const InvalidArgument& e) {
    throw ConfigError(s.path("rates"), e.what());
  }
  const int order = rv.size();
  Vector mean = Vector::Zero(order);
  if (s.has("mean")) {
    const std::vector<double> m = s.numbers("mean");
    if (m.size() != static_cast<std::size_t>(order)) {
      throw ConfigError(s.path("mean"), "expected one entry per rate");
    }
    mean = to_real(std::span<const double>(m));
  }
  const Matrix q = parse_q(s, order);
  const double noise_scale = s.number("noise_scale", 0.1);
  const double noise_rate = s.number("noise_rate", 3.0);
  const double ell0 = s.number("ell0", 0.0);
  s.finish();
  try {
    return ExpansionFamily(levels, rv, mean, q, noise_scale, noise_rate, ell0);
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    std::string field = "family";
    if (msg.find("Q") != std::string::npos) field = s.path("Q");
    else if (msg.find("noise_scale") != std::string::npos) field = s.path("noise_scale");
    else if (msg.find("noise_rate") != std::string::npos) field = s.path("noise_rate");
    else if (msg.find("ell0") != std::string::npos) field = s.path("ell0");
    else if (msg.find("levels") != std::string::npos) field = s.path("levels");
    throw ConfigError(field, msg);
  }
}

CostModel parse_cost(const json& j, int levels) {
  Section s(j, "cost");
  const std::string mode = s.string("mode", "geometric");
  CostModel out = CostModel::geometric(1.0, 1.0);
  try {
    if (mode == "geometric") {
      const double w0 = s.number("w0", 0.25);
      const double gc = s.number("gamma_cost", 2.0);
      if (!(w0 > 0)) throw ConfigError(s.path("w0"), "must be positive");
      if (!(gc > 0)) throw ConfigError(s.path("gamma_cost"), "must be positive");
      out = CostModel::geometric(w0, gc);
    } else if (mode == "table") {
      const std::vector<double> t = s.numbers("table");
      if (t.size() < static_cast<std::size_t>(levels)) {
        throw ConfigError(s.path("table"), "needs at least one entry per level");
      }
      out = CostModel::table(t);
    } else {
      throw ConfigError(s.path("mode"), "expected 'geometric' or 'table'");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(s.path(mode == "table" ? "table" : "mode"), e.what());
  }
  s.finish();
  return out;
}

EstimatorSpec parse_estimator(const json& j, const std::string& path) {
  Section s(j, path);
  EstimatorSpec spec;
  const std::string kind = s.string("kind");
  if (kind == "mc") spec.kind = EstimatorKind::kMc;
  else if (kind == "mlmc") spec.kind = EstimatorKind::kMlmc;
  else if (kind == "re") spec.kind = EstimatorKind::kRe;
  else if (kind == "wre") spec.kind = EstimatorKind::kWeightedRe;
  else if (kind == "saob") spec.kind = EstimatorKind::kSaob;
  else throw ConfigError(s.path("kind"), "expected one of mc, mlmc, re, wre, saob");

  spec.coupling = static_cast<int>(s.integer("coupling", spec.kind == EstimatorKind::kRe ? 3 : 0));
  if (spec.coupling < 0) throw ConfigError(s.path("coupling"), "must be >= 0");
  if (spec.kind == EstimatorKind::kRe && spec.coupling < 2) {
    throw ConfigError(s.path("coupling"), "re needs coupling >= 2");
  }
  const std::string bias = s.string("bias_target", spec.kind == EstimatorKind::kRe ? "re_t" : "unit_L");
  if (bias == "unit_L") spec.bias = BiasTarget::kUnitL;
  else if (bias == "re_t") spec.bias = BiasTarget::kReT;
  else throw ConfigError(s.path("bias_target"), "expected 'unit_L' or 're_t'");
  spec.s = static_cast<int>(s.integer("s", spec.kind == EstimatorKind::kRe ? spec.coupling : 2));
  spec.t = static_cast<int>(s.integer("t", spec.kind == EstimatorKind::kRe ? spec.coupling : 2));
  if (spec.s < 2) throw ConfigError(s.path("s"), "must be >= 2");
  if (spec.t < 2) throw ConfigError(s.path("t"), "must be >= 2");
  spec.label = s.string("label", "");
  if (spec.label.find_first_of(",\"\n/\\ ") != std::string::npos) {
    throw ConfigError(s.path("label"), "must not contain separators, quotes, slashes or spaces");
  }
  s.finish();
  return spec;
}

RunParameters parse_run(const json& j, int levels) {
  Section s(j, "run");
  RunParameters r;
  if (s.has("budget")) {
    r.budget = s.number("budget");
    if (!(*r.budget > 0)) throw ConfigError(s.path("budget"), "must be positive");
  }
  if (s.has("eps")) {
    r.eps = s.number("eps");
    if (!(*r.eps > 0)) throw ConfigError(s.path("eps"), "must be positive");
  }
  if (s.has("eps_grid")) {
    r.eps_grid = s.numbers("eps_grid");
    for (double e : r.eps_grid)
      if (!(e > 0)) throw ConfigError(s.path("eps_grid"), "entries must be positive");
  }
  const std::string mode = s.string("sweep_mode", "grid");
  if (mode == "grid") r.sweep_mode = SweepPlan::Mode::kGrid;
  else if (mode == "levels") r.sweep_mode = SweepPlan::Mode::kLevels;
  else throw ConfigError(s.path("sweep_mode"), "expected 'grid' or 'levels'");
  if (s.has("levels_range")) {
    const std::vector<double> lr = s.numbers("levels_range");
    if (lr.size() != 2 || lr[0] < 1 || lr[1] < lr[0] || std::floor(lr[0]) != lr[0] ||
        std::floor(lr[1]) != lr[1]) {
      throw ConfigError(s.path("levels_range"), "expected [min, max] with 1 <= min <= max");
    }
    r.min_level = static_cast<int>(lr[0]);
    r.max_level = static_cast<int>(lr[1]);
  } else {
    r.max_level = levels;
  }
  r.max_levels = positive_int(s, "max_levels", levels);
  const long long seed = s.integer("seed", 1);
  if (seed < 0) throw ConfigError(s.path("seed"), "must be >= 0");
  r.seed = static_cast<std::uint64_t>(seed);
  r.replications = static_cast<std::size_t>(positive_int(s, "replications", 1000, 2));
  const std::string rounding = s.string("rounding", "ceil");
  if (rounding == "ceil") r.rounding = RoundingPolicy::kCeil;
  else if (rounding == "none") r.rounding = RoundingPolicy::kNone;
  else throw ConfigError(s.path("rounding"), "expected 'ceil' or 'none'");
  if (s.has("ell0_range")) {
    const std::vector<double> er = s.numbers("ell0_range");
    if (er.size() != 2 || er[0] < 0 || er[1] < er[0]) {
      throw ConfigError(s.path("ell0_range"), "expected [min, max] with 0 <= min <= max");
    }
    r.ell0s.clear();
    for (double x = er[0]; x <= er[1] + 1e-9; x += 1.0) r.ell0s.push_back(x);
  }
  if (s.has("couplings")) {
    for (double c : s.numbers("couplings")) {
      if (c < 1 || std::floor(c) != c) throw ConfigError(s.path("couplings"), "entries must be integers >= 1");
      r.couplings.push_back(static_cast<int>(c));
    }
  }
  r.threads = static_cast<unsigned>(positive_int(s, "threads", 1, 0));
  s.finish();
  return r;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  Section root(doc, "");
  ExpansionFamily family = parse_family(root.has("family") ? root.raw("family") : json::object());
  CostModel cost = parse_cost(root.has("cost") ? root.raw("cost") : json::object(), family.levels());
  std::vector<EstimatorSpec> estimators;
  if (root.has("estimators")) {
    const json& list = root.raw("estimators");
    if (!list.is_array()) throw ConfigError("estimators", "expected a list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "estimators[" + std::to_string(i) + "]";
      estimators.push_back(parse_estimator(list[i], path));
      if (!names.insert(estimators.back().name()).second) {
        throw ConfigError(path + ".label", "duplicate estimator name '" + estimators.back().name() + "'");
      }
    }
  }
  RunParameters run = parse_run(root.has("run") ? root.raw("run") : json::object(), family.levels());
  root.finish();
  return RunConfig{std::move(family), std::move(cost), std::move(estimators), std::move(run)};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed config: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace mlblue::cli
