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

#include "spb/error.hpp"
#include "spb/estimation.hpp"

namespace spb {

namespace {

SmwSolver frk_solver(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                     const FrkEmState& state) {
  Eigen::VectorXd d = (sigma_eps_sq * V).array() + state.sigma_xi_sq;
  return SmwSolver(LowRankPlusDiag{S, state.K, std::move(d)});
}

void check_inputs(const DenseMatrix& S, const Eigen::VectorXd& V, const DenseMatrix& residuals) {
  if (S.rows() != V.size() || S.rows() != residuals.rows())
    throw DataError("FRK: basis rows, weights and residuals disagree in length");
  if (residuals.cols() < 1) throw DataError("FRK: no residual fields");
}

}  // namespace

double frk_loglik(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                  const DenseMatrix& residuals, const FrkEmState& state) {
  check_inputs(S, V, residuals);
  const SmwSolver solver = frk_solver(S, V, sigma_eps_sq, state);
  const DenseMatrix si_r = solver.solve(residuals);
  const double ld = solver.log_det();
  double total = 0.0;
  for (Eigen::Index t = 0; t < residuals.cols(); ++t)
    total += gaussian_loglik(ld, residuals.col(t).dot(si_r.col(t)), residuals.rows());
  return total;
}

FrkEmState frk_em_step(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                       const DenseMatrix& residuals, const FrkEmState& state, bool* projected) {
  check_inputs(S, V, residuals);
  const Eigen::Index n = S.rows();
  const Eigen::Index T = residuals.cols();
  const SmwSolver solver = frk_solver(S, V, sigma_eps_sq, state);

  const DenseMatrix si_r = solver.solve(residuals);  // n x T
  const DenseMatrix si_s = solver.solve(S);          // n x r
  const DenseMatrix& K = state.K;

  const DenseMatrix mu = K * (S.transpose() * si_r);  // r x T
  DenseMatrix post = K - K * (S.transpose() * si_s) * K;
  DenseMatrix k_new = post + (mu * mu.transpose()) / static_cast<double>(T);
  k_new = 0.5 * (k_new + k_new.transpose());

  bool clipped = false;
  k_new = nearest_psd(k_new, &clipped);
  if (projected) *projected = clipped;

  const double trace = solver.inverse_diagonal().sum();
  double acc = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) acc += si_r.col(t).squaredNorm() - trace;
  const double s2 = state.sigma_xi_sq;
  double xi_new = s2 + s2 * s2 * acc / static_cast<double>(n * T);
  xi_new = std::max(xi_new, 0.0);

  return FrkEmState{std::move(k_new), xi_new};
}

FrkFit em_fit_frk_fields(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                         const DenseMatrix& residuals, const FrkOptions& opt,
                         std::optional<FrkEmState> init) {
  check_inputs(S, V, residuals);
  if (!(sigma_eps_sq >= 0.0)) throw ConfigError("FRK: sigma_eps_sq must be >= 0");
  if (opt.max_iterations < 1) throw ConfigError("FRK: max_iterations must be >= 1");

  FrkEmState state;
  if (init) {
    state = *init;
  } else {
    const double var = std::max(residuals.squaredNorm() / static_cast<double>(residuals.size()),
                                1e-12);
    const double row_energy = std::max(S.rowwise().squaredNorm().mean(), 1e-12);
    state.K = DenseMatrix::Identity(S.cols(), S.cols()) * (0.5 * var / row_energy);
    state.sigma_xi_sq = 0.05 * var;
  }
  // A zero nugget with zero measurement error leaves D singular.
  const double floor = 1e-10 * std::max(1.0, residuals.cwiseAbs().maxCoeff());
  if ((sigma_eps_sq * V).minCoeff() + state.sigma_xi_sq <= 0.0) state.sigma_xi_sq = floor;

  FrkFit fit;
  double ll = frk_loglik(S, V, sigma_eps_sq, residuals, state);
  fit.diagnostics.initial_objective = ll;
  fit.diagnostics.trace.push_back(ll);
  bool warned_psd = false;
  bool warned_drop = false;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    bool projected = false;
    FrkEmState next = frk_em_step(S, V, sigma_eps_sq, residuals, state, &projected);
    if ((sigma_eps_sq * V).minCoeff() + next.sigma_xi_sq <= 0.0) next.sigma_xi_sq = floor;
    if (projected && !warned_psd) {
      fit.diagnostics.warnings.push_back("FRK: K projected to the PSD cone");
      warned_psd = true;
    }
    const double ll_next = frk_loglik(S, V, sigma_eps_sq, residuals, next);
    fit.diagnostics.trace.push_back(ll_next);
    fit.diagnostics.iterations = it;
    if (ll_next < ll - 1e-10 * std::max(1.0, std::abs(ll)) && !warned_drop) {
      fit.diagnostics.warnings.push_back("FRK: log-likelihood decreased at iteration " +
                                         std::to_string(it));
      warned_drop = true;
    }
    const double change = std::abs(ll_next - ll) / std::max(1.0, std::abs(ll));
    state = std::move(next);
    ll = ll_next;
    if (change < opt.tolerance) {
      fit.diagnostics.converged = true;
      break;
    }
  }
  if (!fit.diagnostics.converged)
    fit.diagnostics.warnings.push_back("FRK: EM hit the iteration cap");
  fit.diagnostics.final_objective = ll;
  fit.params.K = std::move(state.K);
  fit.params.sigma_xi_sq = state.sigma_xi_sq;
  return fit;
}

FrkFit em_fit_frk(const SpatialDataset& data, const TrendSpec& trend, const BisquareBasis& basis,
                  double sigma_eps_sq, const FrkOptions& opt) {
  const auto& locs = data.locations();
  const DenseMatrix X = trend.design(locs);
  const Eigen::VectorXd z = data.value_vector();
  Eigen::VectorXd beta;
  const Eigen::VectorXd r = ols_residuals(X, z, &beta);
  const DenseMatrix S = build_basis_matrix(basis, locs);
  const Eigen::VectorXd V = data.weight_vector();

  FrkFit fit = em_fit_frk_fields(S, V, sigma_eps_sq, r, opt);

  fit.params.beta = std::move(beta);
  return fit;
}

}  // namespace spb
