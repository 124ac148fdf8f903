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

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/kernels.hpp"

namespace spb {

std::vector<double> SspOptions::candidates() const {
  if (!grid.empty()) {
    for (double t : grid)
      if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("SSP: grid values must be > 0");
    return grid;
  }
  if (grid_size < 1 || !(grid_min > 0.0) || !(grid_max >= grid_min))
    throw ConfigError("SSP: invalid penalty grid");
  std::vector<double> out(static_cast<std::size_t>(grid_size));
  const double a = std::log(grid_min);
  const double b = std::log(grid_max);
  for (int k = 0; k < grid_size; ++k)
    out[k] = grid_size == 1 ? grid_min : std::exp(a + (b - a) * k / (grid_size - 1));
  return out;
}

ThinPlateSystem::ThinPlateSystem(std::vector<Location> locs, DenseMatrix X)
    : locs_(std::move(locs)), X_(std::move(X)) {
  const auto n = static_cast<Eigen::Index>(locs_.size());
  if (X_.rows() != n) throw DataError("ThinPlateSystem: design rows do not match locations");
  DenseMatrix W(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    W(j, j) = tps_radial(0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = tps_kernel(locs_[i], locs_[j]);
      W(i, j) = v;
      W(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(W);
  if (es.info() != Eigen::Success) throw NumericalError("ThinPlateSystem: eigensolver failed");
  evecs_ = es.eigenvectors();
  evals_ = es.eigenvalues();
  scale_ = std::max(1.0, evals_.cwiseAbs().maxCoeff());
}

bool ThinPlateSystem::admissible(double theta) const {
  if (!(theta > 0.0)) return false;
  const double gap = (evals_.array() + theta).abs().minCoeff();
  return gap > 1e-12 * std::max(scale_, theta);
}

DenseMatrix ThinPlateSystem::inverse_apply(double theta, const DenseMatrix& b) const {
  const Eigen::VectorXd inv = (evals_.array() + theta).inverse();
  return evecs_ * (inv.asDiagonal() * (evecs_.transpose() * b));
}

ThinPlateSystem::Solution ThinPlateSystem::solve(double theta, const Eigen::VectorXd& z) const {
  if (!admissible(theta)) throw NumericalError("SSP: W + theta I is singular");
  if (z.size() != X_.rows()) throw DataError("SSP: data length mismatch");
  const DenseMatrix ainv_x = inverse_apply(theta, X_);
  const Eigen::VectorXd ainv_z = inverse_apply(theta, z);
  const DenseMatrix m = X_.transpose() * ainv_x;
  Solution s;
  s.beta = m.fullPivLu().solve(X_.transpose() * ainv_z);
  s.coef = ainv_z - ainv_x * s.beta;
  return s;
}

Eigen::VectorXd ThinPlateSystem::hat_diagonal(double theta) const {
  if (!admissible(theta)) throw NumericalError("SSP: W + theta I is singular");
  const Eigen::VectorXd inv = (evals_.array() + theta).inverse();
  const Eigen::VectorXd ainv_diag = evecs_.array().square().matrix() * inv;
  const DenseMatrix ainv_x = inverse_apply(theta, X_);
  const DenseMatrix m = X_.transpose() * ainv_x;
  const DenseMatrix proj = m.fullPivLu().solve(ainv_x.transpose());  // p x n
  const Eigen::VectorXd corr = (ainv_x.array() * proj.transpose().array()).rowwise().sum();
  return (1.0 - theta * ainv_diag.array() + theta * corr.array()).matrix();
}

double ThinPlateSystem::loocv(double theta, const Eigen::VectorXd& z) const {
  const Solution s = solve(theta, z);
  const Eigen::VectorXd h = hat_diagonal(theta);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double denom = 1.0 - h[i];
    const double num = theta * s.coef[i];
    if (std::abs(denom) < 1e-14) {
      if (std::abs(num) < 1e-14) continue;
      return std::numeric_limits<double>::infinity();
    }
    const double e = num / denom;
    acc += e * e;
  }
  return acc / static_cast<double>(z.size());
}

SspFit loocv_select_ssp(const SpatialDataset& data, const TrendSpec& trend,
                        const SspOptions& opt) {
  if (data.size() > opt.max_n) {
    throw InfeasibleError("SSP needs a dense n x n thin-plate system and n = " +
                          std::to_string(data.size()) + " exceeds " + std::to_string(opt.max_n) +
                          "; use a scalable method (FRK, MPP, SPD, LTK)");
  }
  if (data.size() <= trend.dim()) throw DataError("SSP: too few points for the trend");
  const ThinPlateSystem sys(data.locations(), trend.design(data.locations()));
  const Eigen::VectorXd z = data.value_vector();

  SspFit fit;
  fit.grid = opt.candidates();
  fit.scores.assign(fit.grid.size(), std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = fit.grid.size();
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < fit.grid.size(); ++k) {
    if (!sys.admissible(fit.grid[k])) {
      ++skipped;
      continue;
    }
    const double s = sys.loocv(fit.grid[k], z);
    fit.scores[k] = s;
    if (!std::isfinite(s)) continue;
    // Ties go to the smoother (larger) penalty.
    const double tol = 1e-12 * (1.0 + std::abs(best));
    if (best_k == fit.grid.size() || s < best - tol ||
        (std::abs(s - best) <= tol && fit.grid[k] > fit.grid[best_k])) {
      best = std::min(best, s);
      best_k = k;
    }
  }
  if (best_k == fit.grid.size()) throw NumericalError("SSP: no admissible penalty on the grid");
  if (skipped > 0)
    fit.warnings.push_back("SSP: skipped " + std::to_string(skipped) + " singular penalties");
  fit.param.theta_ssp = fit.grid[best_k];
  return fit;
}

}  // namespace spb
