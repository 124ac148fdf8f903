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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spb/basis.hpp"
#include "spb/data.hpp"
#include "spb/linalg.hpp"

namespace spb {

// ------------------------------------------------------------------ common

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  // Objectives are log-likelihoods (higher is better) unless noted.
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<double> trace;
  std::vector<std::string> warnings;
};

// beta = (X'X)^{-1} X'Z via column-pivoting QR. Throws NumericalError when X
// is rank deficient.
Eigen::VectorXd ols_beta(const DenseMatrix& X, const Eigen::VectorXd& z);

// Z - X beta_OLS
Eigen::VectorXd ols_residuals(const DenseMatrix& X, const Eigen::VectorXd& z,
                              Eigen::VectorXd* beta = nullptr);

// Gaussian log-density of `r` under N(0, Sigma) given Sigma's log-determinant
// and the quadratic form r' Sigma^{-1} r.
double gaussian_loglik(double log_det, double quad, Eigen::Index n);

// ------------------------------------------------------------------ TSK

struct TskParams {
  Eigen::VectorXd beta;
  double theta = 1.0;
  double sigma0_sq = 1.0;
  double sigma_xi_sq = 0.0;
};

struct TskOptions {
  std::size_t max_n = 3000;
  int max_evaluations = 400;
};

struct TskFit {
  TskParams params;
  FitDiagnostics diagnostics;
};

// Detrended-data log-likelihood under exponential covariance + nugget +
// known measurement error.
double tsk_loglik(std::span<const Location> locs, const Eigen::VectorXd& residuals,
                  double theta, double sigma0_sq, double sigma_xi_sq, double sigma_eps_sq);

TskFit ml_fit_tsk(const SpatialDataset& data, const TrendSpec& trend, double sigma_eps_sq,
                  const TskOptions& opt = {});

// ------------------------------------------------------------------ FRK

struct FrkParams {
  Eigen::VectorXd beta;
  DenseMatrix K;
  double sigma_xi_sq = 0.0;
};

struct FrkOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;
};

struct FrkFit {
  FrkParams params;
  FitDiagnostics diagnostics;  // trace holds the log-likelihood per iterate
};

struct FrkEmState {
  DenseMatrix K;
  double sigma_xi_sq = 0.0;
};

// Log-likelihood of the columns of `residuals` (independent replicate
// fields sharing locations) under Sigma = S K S' + sigma_xi^2 I + sigma_eps^2 V.
double frk_loglik(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                  const DenseMatrix& residuals, const FrkEmState& state);

// One EM update of (K, sigma_xi^2) treating eta and xi as missing data.
FrkEmState frk_em_step(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                       const DenseMatrix& residuals, const FrkEmState& state,
                       bool* projected = nullptr);

// EM to convergence from a moment-matched start; the log-likelihood trace
// is recorded in diagnostics.trace.
FrkFit em_fit_frk_fields(const DenseMatrix& S, const Eigen::VectorXd& V, double sigma_eps_sq,
                         const DenseMatrix& residuals, const FrkOptions& opt = {},
                         std::optional<FrkEmState> init = std::nullopt);

FrkFit em_fit_frk(const SpatialDataset& data, const TrendSpec& trend, const BisquareBasis& basis,
                  double sigma_eps_sq, const FrkOptions& opt = {});

// ------------------------------------------------------------------ SSP

struct SspParam {
  double theta_ssp = 1.0;
};

struct SspOptions {
  std::size_t max_n = 3000;
  // Log-spaced candidate penalties; `grid` overrides the range when set.
  double grid_min = 1e-4;
  double grid_max = 1e4;
  int grid_size = 41;
  std::vector<double> grid;

  std::vector<double> candidates() const;
};

// The thin-plate system W + theta I with GLS trend, diagonalised once
// (W = V diag(lambda) V') so every penalty costs O(n^2 p).
class ThinPlateSystem {
 public:
  ThinPlateSystem(std::vector<Location> locs, DenseMatrix X);

  struct Solution {
    Eigen::VectorXd beta;
    Eigen::VectorXd coef;  // (W + theta I)^{-1} (Z - X beta)
  };

  // False when W + theta I is numerically singular.
  bool admissible(double theta) const;
  Solution solve(double theta, const Eigen::VectorXd& z) const;
  // Leave-one-out score via the hat-matrix diagonal.
  double loocv(double theta, const Eigen::VectorXd& z) const;
  Eigen::VectorXd hat_diagonal(double theta) const;

  const std::vector<Location>& locations() const { return locs_; }

 private:
  DenseMatrix inverse_apply(double theta, const DenseMatrix& b) const;

  std::vector<Location> locs_;
  DenseMatrix X_;
  DenseMatrix evecs_;
  Eigen::VectorXd evals_;
  double scale_ = 1.0;
};

struct SspFit {
  SspParam param;
  std::vector<double> grid;
  std::vector<double> scores;  // NaN where the penalty was inadmissible
  std::vector<std::string> warnings;
};

SspFit loocv_select_ssp(const SpatialDataset& data, const TrendSpec& trend,
                        const SspOptions& opt = {});

// ------------------------------------------------------------------ lattice models

// SAR matrix on a knot grid: 4 + kappa^2 on the diagonal, -1 for each of the
// four lattice neighbours.
SparseMatrix sar_matrix(const RegularGrid& grid, double kappa);

// Q = (1/sigma_nu_sq) (kappa^2 C + G)' C^{-1} (kappa^2 C + G), the alpha = 1
// SPDE precision on a piecewise-linear mesh with lumped mass C.
SparseMatrix spde_precision(const PiecewiseLinearBasis& mesh, double kappa, double sigma_nu_sq);

// Gaussian model r = S eta + e, eta ~ N(0, Q^{-1}), e ~ N(0, noise_var I),
// evaluated entirely through sparse factorizations of Q and Q + S'S/noise_var.
class GmrfModel {
 public:
  GmrfModel(const SparseMatrix& S, const SparseMatrix& Q, double noise_var);

  double log_likelihood(const Eigen::VectorXd& r) const;
  double quad_form(const Eigen::VectorXd& r) const;  // r' Sigma^{-1} r
  double log_det() const;                            // log|Sigma|
  Eigen::VectorXd posterior_mean(const Eigen::VectorXd& r) const;
  // Posterior variances of a' eta for each row a of `A` (rows are basis rows).
  Eigen::VectorXd posterior_variances(const SparseMatrix& A) const;
  // Prior variances a' Q^{-1} a.
  Eigen::VectorXd prior_variances(const SparseMatrix& A) const;

 private:
  SparseMatrix S_;
  double noise_var_;
  SparseCholesky q_;
  SparseCholesky post_;
};

struct LtkParams {
  Eigen::VectorXd beta;
  double sigma_eta_sq = 1.0;
  double kappa = 0.5;
};

struct LtkOptions {
  double kappa_min = 0.01;
  double kappa_max = 4.0;
  int kappa_grid = 12;
  int sigma_grid = 12;
  int max_evaluations = 200;
};

struct LtkFit {
  LtkParams params;
  FitDiagnostics diagnostics;
};

double ltk_loglik(const SparseMatrix& S, const RegularGrid& grid, const Eigen::VectorXd& residuals,
                  double sigma_eta_sq, double kappa, double sigma_eps_sq);

LtkFit ml_fit_ltk(const SpatialDataset& data, const TrendSpec& trend, const WendlandBasis& basis,
                  double sigma_eps_sq, const LtkOptions& opt = {});

struct SpdParams {
  Eigen::VectorXd beta;
  double kappa = 1.0;
  double sigma_nu_sq = 1.0;
  double sigma_eps_sq = 1.0;
};

struct SpdOptions {
  int kappa_grid = 10;
  int ratio_grid = 10;
  double ratio_min = 1e-3;
  double ratio_max = 1e2;
  int max_evaluations = 200;
};

struct SpdFit {
  SpdParams params;
  FitDiagnostics diagnostics;
};

double spd_loglik(const SparseMatrix& S, const PiecewiseLinearBasis& mesh,
                  const Eigen::VectorXd& residuals, double kappa, double sigma_nu_sq,
                  double sigma_eps_sq);

SpdFit eb_fit_spd(const SpatialDataset& data, const TrendSpec& trend,
                  const PiecewiseLinearBasis& mesh, const SpdOptions& opt = {});

// ------------------------------------------------------------------ MPP

struct MppPriors {
  double a_eta = 2.0;
  double b_eta = 1.0;
  double a_kappa = 0.1;
  double b_kappa = 10.0;
  double a_eps = 2.0;
  double b_eps = 1.0;

  void validate() const;
};

// Stand-in defaults: IG shape 2 for both variances, scale = residual
// variance / 2 for sigma_nu^2 and sigma_eps guess / 2 for sigma_eps^2,
// kappa ~ U(3 / d_max, 3 / d_min) over inter-point distances.
MppPriors default_mpp_priors(std::span<const Location> locs, double residual_variance,
                             double sigma_eps_guess);

struct MppParams {
  Eigen::VectorXd beta;
  double kappa = 1.0;
  double sigma_nu_sq = 1.0;
  double sigma_eps_sq = 1.0;
};

struct MppSample {
  MppParams params;
  Eigen::VectorXd eta;  // knot values of the predictive process
};

struct MppOptions {
  int chain_length = 2000;  // retained draws, after burn-in and thinning
  int burn_in = 500;
  int thin = 1;
  std::uint64_t seed = 1;
  double proposal_sd = 0.3;  // random-walk sd on log kappa, adapted in burn-in
  bool likelihood_enabled = true;
  std::optional<double> fixed_kappa;
  std::optional<double> fixed_sigma_nu_sq;
  std::optional<double> fixed_sigma_eps_sq;
};

struct MppChain {
  std::vector<MppSample> samples;
  MppPriors priors;
  double kappa_acceptance = 0.0;
  // Split-chain potential scale reduction; reported, not enforced.
  double rhat_sigma_nu_sq = 0.0;
  double rhat_kappa = 0.0;
  double rhat_sigma_eps_sq = 0.0;
};

MppChain mcmc_fit_mpp(const SpatialDataset& data, const TrendSpec& trend,
                      const std::vector<Location>& knots, const MppPriors& priors,
                      const MppOptions& opt = {});

double split_rhat(std::span<const double> draws);

}  // namespace spb
