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

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/kernels.hpp"
#include "spb/optimize.hpp"

namespace spb {

namespace {

DenseMatrix tsk_covariance(std::span<const Location> locs, double theta, double sigma0_sq,
                           double nugget) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  const ExponentialCov c{sigma0_sq, theta};
  DenseMatrix s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s(j, j) = sigma0_sq + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = c(distance(locs[i], locs[j]));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

}  // namespace

double tsk_loglik(std::span<const Location> locs, const Eigen::VectorXd& residuals,
                  double theta, double sigma0_sq, double sigma_xi_sq, double sigma_eps_sq) {
  const CholeskyFactor f(tsk_covariance(locs, theta, sigma0_sq, sigma_xi_sq + sigma_eps_sq));
  return gaussian_loglik(f.log_det(), residuals.dot(f.solve(residuals)), residuals.size());
}

TskFit ml_fit_tsk(const SpatialDataset& data, const TrendSpec& trend, double sigma_eps_sq,
                  const TskOptions& opt) {
  if (data.size() > opt.max_n) {
    throw InfeasibleError("TSK needs dense O(n^3) kriging and n = " +
                          std::to_string(data.size()) + " exceeds " + std::to_string(opt.max_n) +
                          "; use a scalable method (FRK, MPP, SPD, LTK)");
  }
  if (!(sigma_eps_sq >= 0.0)) throw ConfigError("TSK: sigma_eps_sq must be >= 0");
  const auto& locs = data.locations();
  const DenseMatrix X = trend.design(locs);
  const Eigen::VectorXd z = data.value_vector();
  Eigen::VectorXd beta;
  const Eigen::VectorXd r = ols_residuals(X, z, &beta);

  const double var = std::max(r.squaredNorm() / std::max<double>(1.0, r.size() - 1.0), 1e-12);
  const double theta0 = std::max(data.bounding_box().diameter() / 10.0, 1e-6);

  auto unpack = [](const Eigen::VectorXd& x) {
    return Eigen::Vector3d(std::exp(std::clamp(x[0], -30.0, 30.0)),
                           std::exp(std::clamp(x[1], -30.0, 30.0)),
                           std::exp(std::clamp(x[2], -30.0, 30.0)));
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::Vector3d p = unpack(x);
    try {
      return -tsk_loglik(locs, r, p[0], p[1], p[2], sigma_eps_sq);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const Eigen::Vector3d x0(std::log(theta0), std::log(var), std::log(0.1 * var));
  NelderMeadOptions nm;
  nm.max_evaluations = opt.max_evaluations;
  nm.ftol = 1e-8;
  nm.xtol = 1e-4;
  const OptimResult res = nelder_mead(objective, x0, nm);

  TskFit fit;
  const Eigen::Vector3d p = unpack(res.x);
  fit.params.theta = p[0];
  fit.params.sigma0_sq = p[1];
  fit.params.sigma_xi_sq = p[2];

  fit.params.beta = std::move(beta);

  fit.diagnostics.converged = res.converged;
  fit.diagnostics.iterations = res.evaluations;
  fit.diagnostics.initial_objective = -res.initial_value;
  fit.diagnostics.final_objective = -res.value;
  for (double v : res.trace) fit.diagnostics.trace.push_back(-v);
  if (!res.converged) fit.diagnostics.warnings.push_back("TSK: optimizer hit the evaluation cap");
  return fit;
}

}  // namespace spb
