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

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "spb/error.hpp"
#include "spb/estimation.hpp"

namespace spb {

Eigen::VectorXd ols_beta(const DenseMatrix& X, const Eigen::VectorXd& z) {
  if (X.rows() != z.size()) throw DataError("ols_beta: design rows do not match data length");
  if (X.rows() < X.cols()) throw DataError("ols_beta: fewer observations than trend terms");
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw NumericalError("ols_beta: trend design is rank deficient");
  return qr.solve(z);
}

Eigen::VectorXd ols_residuals(const DenseMatrix& X, const Eigen::VectorXd& z,
                              Eigen::VectorXd* beta) {
  Eigen::VectorXd b = ols_beta(X, z);
  Eigen::VectorXd r = z - X * b;
  if (beta) *beta = std::move(b);
  return r;
}

double gaussian_loglik(double log_det, double quad, Eigen::Index n) {
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

}  // namespace spb
