// Copyright 2026 The mlblue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <Eigen/Cholesky>

#include "mlblue/real.hpp"

namespace mlblue {

/// Relative residual bound enforced on every SPD solve.
inline constexpr double kSolveResidualTolerance = 1e-10;

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Construction fails with NumericalError when the matrix is not numerically
/// SPD. Every solve checks ||A x - b||_inf <= 1e-10 ||b||_inf and throws on
/// violation; there is no silent fallback to a pseudo-inverse.
class SpdFactor {
 public:
  SpdFactor(const Matrix& a, std::string what);

  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] Matrix solve(const Matrix& b) const;
  [[nodiscard]] Matrix inverse() const;
  [[nodiscard]] Eigen::Index size() const { return a_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
  Eigen::LLT<Matrix> llt_;
  std::string what_;
};

/// Ratio of extreme eigenvalues of a symmetric matrix (infinity if the
/// smallest one is not positive).
[[nodiscard]] Real spd_condition_number(const Matrix& a);

/// True when a is symmetric (to relative 1e-12) and admits a Cholesky factor.
[[nodiscard]] bool is_spd(const Matrix& a);

[[nodiscard]] bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

}  // namespace mlblue
