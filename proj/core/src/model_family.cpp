// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/model_family.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mlblue/error.hpp"
#include "mlblue/linalg.hpp"
#include "mlblue/rng.hpp"

namespace mlblue {

RateVector::RateVector(std::vector<double> g, std::optional<double> cost)
    : gammas(std::move(g)), gamma_cost(cost) {
  validate();
}

void RateVector::validate() const {
  if (gammas.empty()) throw InvalidArgument("rates: at least one rate is required");
  if (gammas.front() != 0.0) throw InvalidArgument("rates: the first rate must be 0");
  for (std::size_t j = 1; j < gammas.size(); ++j) {
    if (!(gammas[j] > gammas[j - 1]) || !std::isfinite(gammas[j])) {
      throw InvalidArgument("rates: must be strictly increasing");
    }
  }
  if (gamma_cost && !(*gamma_cost > 0.0)) {
    throw InvalidArgument("rates: gamma_cost must be positive");
  }
}

double RateVector::gamma(int j) const {
  if (j < 1 || j > size()) {
    throw InvalidArgument("rates: index " + std::to_string(j) + " outside 1.." +
                          std::to_string(size()));
  }
  return gammas[static_cast<std::size_t>(j - 1)];
}

CostModel CostModel::geometric(double w0, double gamma_cost) {
  if (!(w0 > 0.0) || !std::isfinite(w0)) throw InvalidArgument("cost: w0 must be positive");
  if (!(gamma_cost > 0.0)) throw InvalidArgument("cost: gamma_cost must be positive");
  CostModel c;
  c.mode_ = Mode::kGeometric;
  c.w0_ = w0;
  c.gamma_cost_ = gamma_cost;
  return c;
}

CostModel CostModel::table(std::vector<double> costs) {
  if (costs.empty()) throw InvalidArgument("cost: table must not be empty");
  for (double w : costs) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("cost: table entries must be positive");
  }
  CostModel c;
  c.mode_ = Mode::kTable;
  c.table_ = std::move(costs);
  return c;
}

double CostModel::level_cost(int level) const {
  if (level < 1) throw InvalidArgument("cost: level must be >= 1");
  if (mode_ == Mode::kTable) {
    if (level > static_cast<int>(table_.size())) {
      throw InvalidArgument("cost: level " + std::to_string(level) + " beyond the cost table");
    }
    return table_[static_cast<std::size_t>(level - 1)];
  }
  return w0_ * std::exp2(static_cast<double>(level) * gamma_cost_);
}

std::vector<double> CostModel::costs(int levels) const {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(levels));
  for (int l = 1; l <= levels; ++l) w.push_back(level_cost(l));
  return w;
}

double level_cost(const CostModel& cost, int level, int levels) {
  if (level < 1 || level > levels) {
    throw InvalidArgument("cost: level " + std::to_string(level) + " outside 1.." +
                          std::to_string(levels));
  }
  return cost.level_cost(level);
}

MomentData MomentData::truncated(int levels) const {
  if (levels < 1 || levels > this->levels()) throw InvalidArgument("moments: bad truncation");
  return {mu.head(levels), C.topLeftCorner(levels, levels), truth_mean};
}

ExpansionFamily::ExpansionFamily(int levels, RateVector rates, Vector mean, Matrix q,
                                 double noise_scale, double noise_rate, double ell0,
                                 CovarianceCheck check)
    : levels_(levels),
      rates_(std::move(rates)),
      mean_(std::move(mean)),
      q_(std::move(q)),
      noise_scale_(noise_scale),
      noise_rate_(noise_rate),
      ell0_(ell0),
      check_(check) {
  if (levels_ < 1) throw InvalidArgument("family: levels must be >= 1");
  rates_.validate();
  const Eigen::Index order = rates_.size();
  if (mean_.size() != order) throw InvalidArgument("family: mean must have one entry per rate");
  if (q_.rows() != order || q_.cols() != order) {
    throw InvalidArgument("family: Q must be square with one row per rate");
  }
  if (!is_symmetric(q_)) throw InvalidArgument("family: Q must be symmetric");
  if (!(noise_scale_ >= 0.0) || !std::isfinite(noise_scale_)) {
    throw InvalidArgument("family: noise_scale must be >= 0");
  }
  if (!std::isfinite(noise_rate_)) throw InvalidArgument("family: noise_rate must be finite");
  if (!(ell0_ >= 0.0) || !std::isfinite(ell0_)) throw InvalidArgument("family: ell0 must be >= 0");

  q_spd_ = is_spd(q_);
  if (q_spd_) {
    Eigen::LLT<Matrix> llt(q_);
    q_factor_ = llt.matrixL();
  } else {
    if (check_ == CovarianceCheck::kStrict) {
      throw InvalidArgument("family: Q must be symmetric positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(q_);
    const Real scale = q_.cwiseAbs().maxCoeff();
    Vector lambda = es.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) < -Real(1e-12) * (scale + 1)) {
        throw InvalidArgument("family: Q must be positive semidefinite");
      }
      lambda(i) = lambda(i) > 0 ? Real(sqrt(lambda(i))) : Real(0);
    }
    q_factor_ = es.eigenvectors() * lambda.asDiagonal();
  }
}

ExpansionFamily ExpansionFamily::toy(double ell0, int levels) {
  return ExpansionFamily(levels, RateVector({0.0, 1.0, 2.0, 3.0}), Vector::Zero(4),
                         toy_exp_covariance(4), 0.1, 3.0, ell0);
}

Vector ExpansionFamily::level_weights(int level) const {
  if (level < 1 || level > levels_) throw InvalidArgument("family: level out of range");
  Vector w(order());
  const Real shifted = Real(level) + Real(ell0_);
  for (int j = 1; j <= order(); ++j) w(j - 1) = exp2r(-shifted * Real(rates_.gamma(j)));
  return w;
}

Real ExpansionFamily::noise_sd(int level) const {
  if (level < 1 || level > levels_) throw InvalidArgument("family: level out of range");
  return Real(noise_scale_) * exp2r(-(Real(level) + Real(ell0_)) * Real(noise_rate_));
}

ExpansionFamily ExpansionFamily::with_levels(int levels) const {
  return ExpansionFamily(levels, rates_, mean_, q_, noise_scale_, noise_rate_, ell0_, check_);
}

ExpansionFamily ExpansionFamily::with_ell0(double ell0) const {
  return ExpansionFamily(levels_, rates_, mean_, q_, noise_scale_, noise_rate_, ell0, check_);
}

ExpansionFamily ExpansionFamily::with_mean(Vector mean) const {
  return ExpansionFamily(levels_, rates_, std::move(mean), q_, noise_scale_, noise_rate_, ell0_,
                         check_);
}

Matrix toy_exp_covariance(int n) {
  if (n < 1) throw InvalidArgument("toy-exp: size must be >= 1");
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = boost::multiprecision::exp(-Real(std::abs(i - j)));
  return q;
}

MomentData family_moments(const ExpansionFamily& family) {
  if (!family.q_is_spd()) throw InvalidArgument("family: Q must be symmetric positive definite");
  const int levels = family.levels();
  Matrix weights(levels, family.order());
  for (int l = 1; l <= levels; ++l) weights.row(l - 1) = family.level_weights(l).transpose();

  MomentData out;
  out.mu = weights * family.mean();
  out.C = weights * family.q() * weights.transpose();
  for (int l = 1; l <= levels; ++l) {
    const Real sd = family.noise_sd(l);
    out.C(l - 1, l - 1) += sd * sd;
  }
  // Exact symmetry; the two triangles differ only by rounding.
  out.C = ((out.C + out.C.transpose()) / 2).eval();
  out.truth_mean = family.mean()(0);
  return out;
}

PathSampler::PathSampler(const ExpansionFamily& family)
    : levels_(family.levels()),
      order_(family.order()),
      mean_(to_double(family.mean())),
      factor_(to_double(family.q_factor())),
      weights_(levels_, order_),
      noise_sd_(levels_) {
  for (int l = 1; l <= levels_; ++l) {
    weights_.row(l - 1) = to_double(family.level_weights(l)).transpose();
    noise_sd_(l - 1) = to_double(family.noise_sd(l));
  }
}

double PathSampler::evaluate(std::span<const double> normals, std::span<double> out) const {
  const Eigen::Map<const VectorD> latent_normals(normals.data(), order_);
  const VectorD latent = mean_ + factor_ * latent_normals;
  for (int l = 0; l < levels_; ++l) {
    out[static_cast<std::size_t>(l)] =
        weights_.row(l).dot(latent) + noise_sd_(l) * normals[static_cast<std::size_t>(order_ + l)];
  }
  return latent(0);
}

std::vector<PathRecord> sample_paths(const ExpansionFamily& family, std::uint64_t seed,
                                     std::size_t n) {
  if (n < 1) throw InvalidArgument("sample_paths: n must be >= 1");
  const PathSampler sampler(family);
  std::vector<double> normals(static_cast<std::size_t>(sampler.normals_per_event()));
  std::vector<PathRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    GaussianStream stream(StreamId{seed, kDomainPathRecords, static_cast<std::uint32_t>(i),
                                   static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32),
                                   0});
    stream.fill(normals);
    records[i].levels.resize(static_cast<std::size_t>(family.levels()));
    records[i].truth = sampler.evaluate(normals, records[i].levels);
  }
  return records;
}

}  // namespace mlblue
