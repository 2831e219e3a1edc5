// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Scalar and dense matrix types shared by every numerical module.
//
// Covariances of hierarchical model families are severely ill-conditioned:
// for the toy families used in the convergence studies the smallest
// eigenvalue of C sits twenty orders of magnitude below the largest, so all
// analytic computations run in IEEE binary128 (113-bit mantissa). Sampling
// and simulation stay in double.

#include <boost/multiprecision/float128.hpp>

#include <Eigen/Core>

#include <limits>
#include <span>
#include <vector>

namespace mlblue {

using Real = boost::multiprecision::float128;

}  // namespace mlblue

namespace Eigen {

template <>
struct NumTraits<mlblue::Real> : GenericNumTraits<mlblue::Real> {
  using Real = mlblue::Real;
  using NonInteger = mlblue::Real;
  using Nested = mlblue::Real;
  using Literal = mlblue::Real;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 8
  };

  static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static Real dummy_precision() { return Real(1e-30); }
  static Real highest() { return (std::numeric_limits<Real>::max)(); }
  static Real lowest() { return -(std::numeric_limits<Real>::max)(); }
  static Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Real>::digits10; }
  static int digits() { return std::numeric_limits<Real>::digits; }
};

}  // namespace Eigen

namespace mlblue {

using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorD = Eigen::VectorXd;
using MatrixD = Eigen::MatrixXd;

inline double to_double(const Real& x) { return x.convert_to<double>(); }

inline VectorD to_double(const Vector& v) {
  VectorD out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = to_double(v(i));
  return out;
}

inline MatrixD to_double(const Matrix& m) {
  MatrixD out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = to_double(m(i, j));
  return out;
}

inline Vector to_real(const VectorD& v) { return v.cast<Real>(); }
inline Matrix to_real(const MatrixD& m) { return m.cast<Real>(); }

inline Vector to_real(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline std::vector<double> to_std(const Vector& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = to_double(v(i));
  return out;
}

/// 2^x in the working precision.
inline Real exp2r(const Real& x) { return boost::multiprecision::exp2(x); }

}  // namespace mlblue
