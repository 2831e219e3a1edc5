// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlblue/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "mlblue/error.hpp"

namespace mlblue {

namespace {

Real max_abs(const Matrix& m) {
  return m.size() == 0 ? Real(0) : m.cwiseAbs().maxCoeff();
}

}  // namespace

SpdFactor::SpdFactor(const Matrix& a, std::string what) : a_(a), what_(std::move(what)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) {
    throw NumericalError(what_ + ": expected a non-empty square matrix");
  }
  llt_.compute(a_);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError(what_ + ": matrix is not positive definite");
  }
  const auto& l = llt_.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0)) throw NumericalError(what_ + ": matrix is not positive definite");
  }
}

Vector SpdFactor::solve(const Vector& b) const {
  Vector x = llt_.solve(b);
  const Real scale = b.size() == 0 ? Real(0) : b.cwiseAbs().maxCoeff();
  const Real residual = (a_ * x - b).cwiseAbs().maxCoeff();
  if (!(residual <= Real(kSolveResidualTolerance) * scale)) {
    throw NumericalError(what_ + ": solve failed the relative residual check");
  }
  return x;
}

Matrix SpdFactor::solve(const Matrix& b) const {
  Matrix x = llt_.solve(b);
  const Real residual = max_abs(a_ * x - b);
  if (!(residual <= Real(kSolveResidualTolerance) * max_abs(b))) {
    throw NumericalError(what_ + ": solve failed the relative residual check");
  }
  return x;
}

Matrix SpdFactor::inverse() const {
  return solve(Matrix(Matrix::Identity(a_.rows(), a_.cols())));
}

Real spd_condition_number(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return std::numeric_limits<Real>::infinity();
  const Real lo = es.eigenvalues().minCoeff();
  const Real hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0)) return std::numeric_limits<Real>::infinity();
  return hi / lo;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const Real scale = max_abs(a);
  return max_abs(a - a.transpose()) <= Real(rel_tol) * scale;
}

bool is_spd(const Matrix& a) {
  if (a.rows() == 0 || !is_symmetric(a)) return false;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return false;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0)) return false;
  }
  return true;
}

}  // namespace mlblue
