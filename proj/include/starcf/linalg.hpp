// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "starcf/error.hpp"

namespace starcf {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Dense row-major grid of matrices indexed by (m, k).
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, const T& init = T())
      : rows_(rows), cols_(cols), data_(rows * cols, init) {}

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// sin(pi x) / (pi x)
inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

inline double real_trace(const CMatrix& a) { return a.trace().real(); }

/// tr(A B) without forming the product.
inline cplx trace_of_product(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum();
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline double min_eigenvalue(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// PSD up to -tol * |tr|.
inline bool is_psd(const CMatrix& a, double rel_tol = 1e-10) {
  const double scale = std::max(std::abs(real_trace(a)), 1e-300);
  return min_eigenvalue(a) >= -rel_tol * scale;
}

inline bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Lower factor L with L L^H = A. A numerically indefinite input gets one
/// retry with +1e-12 * (tr(A)/n) * I added to the diagonal.
inline CMatrix cholesky_factor(const CMatrix& a) {
  const auto n = a.rows();
  if (n == 0) return CMatrix(0, 0);
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double shift = 1e-12 * std::max(std::abs(real_trace(a)) / static_cast<double>(n), 1e-300);
  CMatrix reg = hermitian_part(a);
  reg.diagonal().array() += shift;
  Eigen::LLT<CMatrix> retry(reg);
  if (retry.info() != Eigen::Success) {
    throw Error(ErrorCode::kCholeskyFailure, "correlation matrix is not positive semi-definite");
  }
  return retry.matrixL();
}

/// Matrix holding only the diagonal of A.
inline CMatrix diag_part(const CMatrix& a) {
  CMatrix d = CMatrix::Zero(a.rows(), a.cols());
  d.diagonal() = a.diagonal();
  return d;
}

}  // namespace starcf
