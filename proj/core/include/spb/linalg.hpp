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

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace spb {

// Dense matrices are Eigen column-major throughout.
using DenseMatrix = Eigen::MatrixXd;

// Compressed sparse storage. All sparse matrices built by this library are
// symmetric, so the compressed-column layout Eigen's factorizations expect is
// identical to compressed-row storage of the same matrix.
using SparseMatrix = Eigen::SparseMatrix<double>;

// Dense Cholesky A = LL'. Immutable after construction; concurrent solves are
// safe.
class CholeskyFactor {
 public:
  // Throws NumericalError on a non-positive pivot or an asymmetric input.
  explicit CholeskyFactor(const DenseMatrix& a);

  // Covariance jitter policy: on failure, retry once with
  // 1e-8 * mean(diag(A)) added to the diagonal; a second failure throws.
  static CholeskyFactor with_jitter(const DenseMatrix& a);

  Eigen::Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;
  // L^{-1} B
  DenseMatrix solve_lower(const DenseMatrix& b) const;
  DenseMatrix lower() const;

  // 2 * sum(log L_ii)
  double log_det() const;

 private:
  CholeskyFactor(const DenseMatrix& a, double jitter);

  Eigen::LLT<DenseMatrix> llt_;
  double jitter_ = 0.0;
};

// Sigma = S K S' + diag(d); S is n x r, K is r x r SPD, d > 0.
struct LowRankPlusDiag {
  DenseMatrix S;
  DenseMatrix K;
  Eigen::VectorXd d;

  Eigen::Index n() const { return d.size(); }
  Eigen::Index rank() const { return S.cols(); }
  // Only for tests and small problems.
  DenseMatrix dense() const;
};

// Applies Sigma^{-1} for a LowRankPlusDiag through the Sherman-Morrison-
// Woodbury identity in O(n r^2), never forming an n x n matrix.
//
// With K = L L' and U = S L, SKS' = UU' and
//
//   Sigma^{-1} = D^{-1} - D^{-1} U (I_r + U' D^{-1} U)^{-1} U' D^{-1},
//   log|Sigma| = sum log d_i + log|I_r + U' D^{-1} U|.
//
// Factoring K instead of inverting it keeps the inner system well posed
// when K is only positive semidefinite.
class SmwSolver {
 public:
  explicit SmwSolver(LowRankPlusDiag m);

  const LowRankPlusDiag& system() const { return m_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;
  double log_det() const;
  // diag(Sigma^{-1}) in O(n r^2).
  Eigen::VectorXd inverse_diagonal() const;
  // S' Sigma^{-1} S, an r x r matrix.
  DenseMatrix projected_inverse() const;

 private:
  LowRankPlusDiag m_;
  Eigen::VectorXd d_inv_;
  DenseMatrix k_root_;     // r x r, K = k_root k_root'
  DenseMatrix dinv_u_;     // n x r, D^{-1} U
  Eigen::LLT<DenseMatrix> inner_;  // I + U' D^{-1} U
};

Eigen::VectorXd smw_solve(const LowRankPlusDiag& m, const Eigen::VectorXd& b);
double smw_logdet(const LowRankPlusDiag& m);

// Symmetric square root factor R with RR' = A for a symmetric PSD A.
// Uses Cholesky when possible, otherwise a clipped eigendecomposition.
DenseMatrix psd_root(const DenseMatrix& a);

// Nearest PSD matrix in Frobenius norm (eigenvalues clipped at zero).
// Returns true through `clipped` when any eigenvalue was negative.
DenseMatrix nearest_psd(const DenseMatrix& a, bool* clipped = nullptr);

// Sparse Cholesky with a fill-reducing (AMD) ordering.
class SparseCholesky {
 public:
  explicit SparseCholesky(const SparseMatrix& q);

  Eigen::Index size() const { return n_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;
  double log_det() const;

 private:
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  Eigen::Index n_ = 0;
};

Eigen::VectorXd sparse_chol_solve(const SparseMatrix& q, const Eigen::VectorXd& b);

}  // namespace spb
