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
#include <numbers>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/optimize.hpp"

namespace spb {

SparseMatrix sar_matrix(const RegularGrid& grid, double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("sar_matrix: kappa must be >= 0");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(grid.size()) * 5);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const auto k = grid.index(i, j);
      trips.emplace_back(k, k, 4.0 + kappa * kappa);
      if (i > 0) trips.emplace_back(k, grid.index(i - 1, j), -1.0);
      if (i + 1 < grid.nx) trips.emplace_back(k, grid.index(i + 1, j), -1.0);
      if (j > 0) trips.emplace_back(k, grid.index(i, j - 1), -1.0);
      if (j + 1 < grid.ny) trips.emplace_back(k, grid.index(i, j + 1), -1.0);
    }
  }
  SparseMatrix b(grid.size(), grid.size());
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

SparseMatrix spde_precision(const PiecewiseLinearBasis& mesh, double kappa, double sigma_nu_sq) {
  if (!(kappa > 0.0) || !(sigma_nu_sq > 0.0))
    throw ConfigError("spde_precision: kappa and sigma_nu_sq must be > 0");
  const Eigen::VectorXd c = mesh.lumped_mass();
  const SparseMatrix g = mesh.stiffness();
  SparseMatrix k = g;
  for (Eigen::Index i = 0; i < k.rows(); ++i) k.coeffRef(i, i) += kappa * kappa * c[i];
  const Eigen::VectorXd c_inv = c.cwiseInverse();
  SparseMatrix q = (k.transpose() * c_inv.asDiagonal()) * k;
  q /= sigma_nu_sq;
  q.prune(0.0);
  return q;
}

// ------------------------------------------------------------------ GmrfModel

namespace {

SparseMatrix posterior_precision(const SparseMatrix& S, const SparseMatrix& Q, double noise_var) {
  if (!(noise_var > 0.0)) throw ConfigError("GMRF model: noise variance must be > 0");
  if (S.cols() != Q.rows() || Q.rows() != Q.cols())
    throw DataError("GMRF model: basis and precision sizes disagree");
  SparseMatrix st = S.transpose();
  SparseMatrix post = Q + (st * S) / noise_var;
  return post;
}

}  // namespace

GmrfModel::GmrfModel(const SparseMatrix& S, const SparseMatrix& Q, double noise_var)
    : S_(S), noise_var_(noise_var), q_(Q), post_(posterior_precision(S, Q, noise_var)) {}

double GmrfModel::log_det() const {
  return post_.log_det() - q_.log_det() + static_cast<double>(S_.rows()) * std::log(noise_var_);
}

double GmrfModel::quad_form(const Eigen::VectorXd& r) const {
  if (r.size() != S_.rows()) throw DataError("GMRF model: residual length mismatch");
  const Eigen::VectorXd str = S_.transpose() * r;
  return r.squaredNorm() / noise_var_ - str.dot(post_.solve(str)) / (noise_var_ * noise_var_);
}

double GmrfModel::log_likelihood(const Eigen::VectorXd& r) const {
  return gaussian_loglik(log_det(), quad_form(r), r.size());
}

Eigen::VectorXd GmrfModel::posterior_mean(const Eigen::VectorXd& r) const {
  if (r.size() != S_.rows()) throw DataError("GMRF model: residual length mismatch");
  return post_.solve(Eigen::VectorXd(S_.transpose() * r)) / noise_var_;
}

namespace {

Eigen::VectorXd quadratic_diagonal(const SparseCholesky& f, const SparseMatrix& A) {
  constexpr Eigen::Index kChunk = 256;
  Eigen::VectorXd out(A.rows());
  const SparseMatrix at = A.transpose();
  for (Eigen::Index c0 = 0; c0 < A.rows(); c0 += kChunk) {
    const Eigen::Index w = std::min(kChunk, A.rows() - c0);
    const DenseMatrix block = DenseMatrix(at.middleCols(c0, w));
    const DenseMatrix sol = f.solve(block);
    out.segment(c0, w) = (block.array() * sol.array()).colwise().sum().transpose();
  }
  return out;
}

}  // namespace

Eigen::VectorXd GmrfModel::posterior_variances(const SparseMatrix& A) const {
  if (A.cols() != S_.cols()) throw DataError("GMRF model: basis width mismatch");
  return quadratic_diagonal(post_, A);
}

Eigen::VectorXd GmrfModel::prior_variances(const SparseMatrix& A) const {
  if (A.cols() != S_.cols()) throw DataError("GMRF model: basis width mismatch");
  return quadratic_diagonal(q_, A);
}

// ------------------------------------------------------------------ LTK

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 1)));
  if (count <= 1) {
    out[0] = std::sqrt(lo * hi);
    return out;
  }
  for (int k = 0; k < count; ++k)
    out[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (count - 1));
  return out;
}

double safe(const std::function<double()>& f) {
  try {
    const double v = f();
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const ConfigError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Grid search in log coordinates then Nelder-Mead from the best grid point.
FitDiagnostics grid_then_refine(const std::function<double(double, double)>& loglik,
                                const std::vector<double>& ga, const std::vector<double>& gb,
                                int max_evaluations, Eigen::Vector2d& best_log) {
  double best = -std::numeric_limits<double>::infinity();
  best_log = Eigen::Vector2d(std::log(ga[ga.size() / 2]), std::log(gb[gb.size() / 2]));
  for (double a : ga) {
    for (double b : gb) {
      const double v = safe([&] { return loglik(a, b); });
      if (v > best) {
        best = v;
        best_log = Eigen::Vector2d(std::log(a), std::log(b));
      }
    }
  }
  if (!std::isfinite(best)) throw NumericalError("likelihood is not finite anywhere on the search grid");

  auto objective = [&](const Eigen::VectorXd& x) {
    if (x.cwiseAbs().maxCoeff() > 60.0) return std::numeric_limits<double>::infinity();
    return -safe([&] { return loglik(std::exp(x[0]), std::exp(x[1])); });
  };
  NelderMeadOptions nm;
  nm.max_evaluations = max_evaluations;
  nm.initial_step = 0.3;
  nm.ftol = 1e-9;
  nm.xtol = 1e-4;
  const OptimResult res = nelder_mead(objective, best_log, nm);
  best_log = res.x;

  FitDiagnostics d;
  d.converged = res.converged;
  d.iterations = res.evaluations;
  d.initial_objective = -res.initial_value;
  d.final_objective = -res.value;
  for (double v : res.trace) d.trace.push_back(-v);
  if (!res.converged) d.warnings.push_back("optimizer hit the evaluation cap");
  return d;
}

}  // namespace

double ltk_loglik(const SparseMatrix& S, const RegularGrid& grid, const Eigen::VectorXd& residuals,
                  double sigma_eta_sq, double kappa, double sigma_eps_sq) {
  if (!(sigma_eta_sq > 0.0)) throw ConfigError("LTK: sigma_eta_sq must be > 0");
  const SparseMatrix b = sar_matrix(grid, kappa);
  const SparseMatrix q = SparseMatrix(b.transpose() * b) / sigma_eta_sq;
  return GmrfModel(S, q, sigma_eps_sq).log_likelihood(residuals);
}

LtkFit ml_fit_ltk(const SpatialDataset& data, const TrendSpec& trend, const WendlandBasis& basis,
                  double sigma_eps_sq, const LtkOptions& opt) {
  if (!(sigma_eps_sq > 0.0))
    throw ConfigError("LTK: sigma_eps_sq must be > 0 (the model has no other nugget)");
  if (!(opt.kappa_min > 0.0) || !(opt.kappa_max >= opt.kappa_min))
    throw ConfigError("LTK: invalid kappa range");
  const auto& locs = data.locations();
  Eigen::VectorXd beta;
  const Eigen::VectorXd r = ols_residuals(trend.design(locs), data.value_vector(), &beta);
  const SparseMatrix S = build_sparse_basis_matrix(basis, locs);
  const double var = std::max(r.squaredNorm() / static_cast<double>(r.size()), 1e-12);

  auto loglik = [&](double sigma_eta_sq, double kappa) {
    return ltk_loglik(S, basis.grid(), r, sigma_eta_sq, kappa, sigma_eps_sq);
  };
  Eigen::Vector2d x;
  LtkFit fit;
  fit.diagnostics = grid_then_refine(loglik, log_grid(var * 1e-5, var * 10.0, opt.sigma_grid),
                                     log_grid(opt.kappa_min, opt.kappa_max, opt.kappa_grid),
                                     opt.max_evaluations, x);
  fit.params.beta = std::move(beta);
  fit.params.sigma_eta_sq = std::exp(x[0]);
  fit.params.kappa = std::exp(x[1]);
  return fit;
}

// ------------------------------------------------------------------ SPD

double spd_loglik(const SparseMatrix& S, const PiecewiseLinearBasis& mesh,
                  const Eigen::VectorXd& residuals, double kappa, double sigma_nu_sq,
                  double sigma_eps_sq) {
  return GmrfModel(S, spde_precision(mesh, kappa, sigma_nu_sq), sigma_eps_sq)
      .log_likelihood(residuals);
}

SpdFit eb_fit_spd(const SpatialDataset& data, const TrendSpec& trend,
                  const PiecewiseLinearBasis& mesh, const SpdOptions& opt) {
  const auto& locs = data.locations();
  for (const auto& u : locs)
    if (!mesh.covers(u)) throw DataError("SPD: mesh hull does not cover the data");
  Eigen::VectorXd beta;
  const Eigen::VectorXd r = ols_residuals(trend.design(locs), data.value_vector(), &beta);
  const SparseMatrix S = build_sparse_basis_matrix(mesh, locs);
  const auto n = static_cast<double>(r.size());

  // sigma_nu^2 is profiled out. The second coordinate is the ratio of noise to
  // the field's marginal variance sigma_nu^2 / (4 pi kappa^2).
  auto lambda_of = [](double kappa, double rho) {
    return rho / (4.0 * std::numbers::pi * kappa * kappa);
  };
  auto profile = [&](double kappa, double rho, double* sigma_nu_sq) {
    const GmrfModel m(S, spde_precision(mesh, kappa, 1.0), lambda_of(kappa, rho));
    const double s2 = std::max(m.quad_form(r) / n, 1e-300);
    if (sigma_nu_sq) *sigma_nu_sq = s2;
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + n * std::log(s2) + m.log_det() + n);
  };

  const BoundingBox hull = mesh.grid().hull();
  const double h = mesh.grid().spacing;
  const double k_lo = std::sqrt(8.0) / std::max(hull.diameter(), h);
  const double k_hi = std::sqrt(8.0) / h;
  Eigen::Vector2d x;
  SpdFit fit;
  fit.diagnostics = grid_then_refine(
      [&](double kappa, double rho) { return profile(kappa, rho, nullptr); },
      log_grid(k_lo, k_hi, opt.kappa_grid), log_grid(opt.ratio_min, opt.ratio_max, opt.ratio_grid),
      opt.max_evaluations, x);

  const double kappa = std::exp(x[0]);
  const double rho = std::exp(x[1]);
  double s2 = 0.0;
  profile(kappa, rho, &s2);
  fit.params.beta = std::move(beta);
  fit.params.kappa = kappa;
  fit.params.sigma_nu_sq = s2;
  fit.params.sigma_eps_sq = lambda_of(kappa, rho) * s2;
  return fit;
}

}  // namespace spb
