/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "spb/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "spb/error.hpp"

namespace spb {

namespace {

void check_symmetric(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw NumericalError("Cholesky of a non-square matrix");
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if (a.rows() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("Cholesky input is not symmetric");
  }
  if (!a.allFinite()) throw NumericalError("Cholesky input has non-finite entries");
}

}  // namespace

CholeskyFactor::CholeskyFactor(const DenseMatrix& a) : CholeskyFactor(a, 0.0) {}

CholeskyFactor::CholeskyFactor(const DenseMatrix& a, double jitter) : jitter_(jitter) {
  check_symmetric(a);
  if (jitter > 0.0) {
    DenseMatrix b = a;
    b.diagonal().array() += jitter;
    llt_.compute(b);
  } else {
    llt_.compute(a);
  }
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed: matrix is not positive definite");
  }
  // Eigen's LLT reports success on some semidefinite inputs; reject zero or
  // tiny pivots explicitly.
  const auto diag = llt_.matrixLLT().diagonal();
  if (a.rows() > 0 && (diag.array() <= 0.0).any()) {
    throw NumericalError("Cholesky factorization failed: non-positive pivot");
  }
}

CholeskyFactor CholeskyFactor::with_jitter(const DenseMatrix& a) {
  try {
    return CholeskyFactor(a, 0.0);
  } catch (const NumericalError&) {
    const double mean_diag = a.rows() > 0 ? a.diagonal().mean() : 0.0;
    const double jitter = 1e-8 * std::abs(mean_diag);
    if (!(jitter > 0.0)) throw;
    return CholeskyFactor(a, jitter);
  }
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

DenseMatrix CholeskyFactor::solve(const DenseMatrix& b) const { return llt_.solve(b); }

DenseMatrix CholeskyFactor::solve_lower(const DenseMatrix& b) const {
  return llt_.matrixL().solve(b);
}

DenseMatrix CholeskyFactor::lower() const { return llt_.matrixL(); }

double CholeskyFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

DenseMatrix LowRankPlusDiag::dense() const {
  DenseMatrix out = S * K * S.transpose();
  out.diagonal() += d;
  return out;
}

DenseMatrix psd_root(const DenseMatrix& a) {
  if (a.rows() == 0) return a;
  Eigen::LLT<DenseMatrix> llt(a);
  if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all()) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (a + a.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal();
}

DenseMatrix nearest_psd(const DenseMatrix& a, bool* clipped) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (a + a.transpose()));
  const bool neg = a.rows() > 0 && es.eigenvalues().minCoeff() < 0.0;
  if (clipped) *clipped = neg;
  if (!neg) return 0.5 * (a + a.transpose());
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

SmwSolver::SmwSolver(LowRankPlusDiag m) : m_(std::move(m)) {
  const Eigen::Index n = m_.d.size();
  const Eigen::Index r = m_.S.cols();
  if (m_.S.rows() != n) throw NumericalError("SMW: S has the wrong number of rows");
  if (m_.K.rows() != r || m_.K.cols() != r) throw NumericalError("SMW: K must be r x r");
  if (!(m_.d.array() > 0.0).all() || !m_.d.allFinite()) {
    throw NumericalError("SMW: diagonal part must be positive and finite");
  }
  d_inv_ = m_.d.cwiseInverse();
  k_root_ = psd_root(m_.K);
  dinv_u_ = d_inv_.asDiagonal() * (m_.S * k_root_);
  DenseMatrix inner = DenseMatrix::Identity(r, r);
  inner.noalias() += (m_.S * k_root_).transpose() * dinv_u_;
  inner_.compute(inner);
  if (inner_.info() != Eigen::Success) {
    throw NumericalError("SMW: inner r x r system is singular");
  }
}

Eigen::VectorXd SmwSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = d_inv_.cwiseProduct(b);
  if (m_.S.cols() == 0) return x;
  const Eigen::VectorXd t = inner_.solve(dinv_u_.transpose() * b);
  x.noalias() -= dinv_u_ * t;
  return x;
}

DenseMatrix SmwSolver::solve(const DenseMatrix& b) const {
  DenseMatrix x = d_inv_.asDiagonal() * b;
  if (m_.S.cols() == 0) return x;
  const DenseMatrix t = inner_.solve(dinv_u_.transpose() * b);
  x.noalias() -= dinv_u_ * t;
  return x;
}

double SmwSolver::log_det() const {
  double ld = m_.d.array().log().sum();
  if (m_.S.cols() > 0) ld += 2.0 * inner_.matrixLLT().diagonal().array().log().sum();
  return ld;
}

Eigen::VectorXd SmwSolver::inverse_diagonal() const {
  Eigen::VectorXd out = d_inv_;
  if (m_.S.cols() == 0) return out;
  // (D^{-1}U M^{-1} U'D^{-1})_ii = || L_M^{-1} (D^{-1}U)' e_i ||^2
  const DenseMatrix y = inner_.matrixL().solve(dinv_u_.transpose());
  out -= y.colwise().squaredNorm().transpose();
  return out;
}

DenseMatrix SmwSolver::projected_inverse() const {
  return m_.S.transpose() * solve(DenseMatrix(m_.S));
}

Eigen::VectorXd smw_solve(const LowRankPlusDiag& m, const Eigen::VectorXd& b) {
  return SmwSolver(m).solve(b);
}

double smw_logdet(const LowRankPlusDiag& m) { return SmwSolver(m).log_det(); }

SparseCholesky::SparseCholesky(const SparseMatrix& q) : n_(q.rows()) {
  if (q.rows() != q.cols()) throw NumericalError("sparse Cholesky of a non-square matrix");
  llt_.compute(q);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("sparse Cholesky breakdown: matrix is not positive definite");
  }
  const Eigen::VectorXd diag = llt_.matrixL().nestedExpression().diagonal();
  if (n_ > 0 && !(diag.array() > 0.0).all()) {
    throw NumericalError("sparse Cholesky breakdown: non-positive pivot");
  }
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

DenseMatrix SparseCholesky::solve(const DenseMatrix& b) const { return llt_.solve(b); }

double SparseCholesky::log_det() const {
  const Eigen::VectorXd diag = llt_.matrixL().nestedExpression().diagonal();
  return 2.0 * diag.array().log().sum();
}

Eigen::VectorXd sparse_chol_solve(const SparseMatrix& q, const Eigen::VectorXd& b) {
  return SparseCholesky(q).solve(b);
}

}  // namespace spb
