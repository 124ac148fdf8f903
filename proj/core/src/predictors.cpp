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

#include "spb/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "spb/error.hpp"
#include "spb/kernels.hpp"
#include "spb/parallel.hpp"
#include "spb/serialize.hpp"

namespace spb {

// ------------------------------------------------------------------ base

void FittedPredictor::build_index() const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (indexed_) return;
  const auto& locs = train_.locations();
  index_.reserve(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i)
    index_.emplace_back(canonical_key(locs[i]), static_cast<long>(i));
  std::sort(index_.begin(), index_.end());
  indexed_ = true;
}

long FittedPredictor::training_index(const Location& u) const {
  if (!indexed_) build_index();
  const auto key = canonical_key(u);
  const auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(key, -1L));
  return it != index_.end() && it->first == key ? it->second : -1;
}

namespace {

void check_locations(std::span<const Location> u) {
  for (const auto& x : u) validate_location(x);
}

constexpr std::size_t kChunk = 512;

// ------------------------------------------------------------------ TSK

class TskPredictor final : public FittedPredictor {
 public:
  TskPredictor(SpatialDataset train, TrendSpec trend, TskParams p, double sigma_eps_sq)
      : FittedPredictor(Method::TSK, std::move(train), std::move(trend)),
        p_(std::move(p)),
        sigma_eps_sq_(sigma_eps_sq) {
    if (!(p_.theta > 0.0) || p_.sigma0_sq < 0.0 || p_.sigma_xi_sq < 0.0 || sigma_eps_sq < 0.0)
      throw ConfigError("TSK: invalid parameters");
    if (static_cast<std::size_t>(p_.beta.size()) != trend_.dim())
      throw ConfigError("TSK: beta length does not match the trend");
    const auto& locs = train_.locations();
    const auto n = static_cast<Eigen::Index>(locs.size());
    DenseMatrix s(n, n);
    const ExponentialCov c{p_.sigma0_sq, p_.theta};
    for (Eigen::Index j = 0; j < n; ++j) {
      s(j, j) = p_.sigma0_sq + p_.sigma_xi_sq + sigma_eps_sq_;
      for (Eigen::Index i = j + 1; i < n; ++i) s(i, j) = s(j, i) = c(distance(locs[i], locs[j]));
    }
    factor_.emplace(CholeskyFactor::with_jitter(s));
    alpha_ = factor_->solve(Eigen::VectorXd(train_.value_vector() - trend_.design(locs) * p_.beta));
  }

  PredictionResult predict(std::span<const Location> u, bool with_variance) const override {
    check_locations(u);
    PredictionResult out;
    out.method = method_;
    out.mean.resize(u.size());
    if (with_variance) out.variance.emplace(u.size());
    const auto& locs = train_.locations();
    const auto n = static_cast<Eigen::Index>(locs.size());
    const ExponentialCov cov{p_.sigma0_sq, p_.theta};
    parallel_for((u.size() + kChunk - 1) / kChunk, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        const std::size_t b = c * kChunk;
        const std::size_t e = std::min(u.size(), b + kChunk);
        DenseMatrix C(n, static_cast<Eigen::Index>(e - b));
        for (std::size_t k = b; k < e; ++k) {
          const auto col = static_cast<Eigen::Index>(k - b);
          for (Eigen::Index i = 0; i < n; ++i) C(i, col) = cov(distance(locs[i], u[k]));
          const long idx = training_index(u[k]);
          if (idx >= 0) C(idx, col) += p_.sigma_xi_sq;
        }
        const Eigen::VectorXd m = C.transpose() * alpha_;
        DenseMatrix sic;
        if (with_variance) sic = factor_->solve(C);
        for (std::size_t k = b; k < e; ++k) {
          const auto col = static_cast<Eigen::Index>(k - b);
          out.mean[k] = trend_.covariates(u[k]).dot(p_.beta) + m[col];
          if (with_variance) {
            const double v = p_.sigma0_sq + p_.sigma_xi_sq - C.col(col).dot(sic.col(col));
            (*out.variance)[k] = std::max(v, 0.0);
          }
        }
      }
    }, 1);
    return out;
  }

  nlohmann::json params_json() const override {
    nlohmann::json j = params_to_json(p_);
    j["sigma_eps_sq"] = sigma_eps_sq_;
    return j;
  }

 private:
  TskParams p_;
  double sigma_eps_sq_;
  std::optional<CholeskyFactor> factor_;
  Eigen::VectorXd alpha_;
};

// ------------------------------------------------------------------ SSP

class SspPredictor final : public FittedPredictor {
 public:
  SspPredictor(SpatialDataset train, TrendSpec trend, SspParam p)
      : FittedPredictor(Method::SSP, std::move(train), std::move(trend)), p_(p) {
    if (!(p_.theta_ssp > 0.0)) throw ConfigError("SSP: theta must be > 0");
    const ThinPlateSystem sys(train_.locations(), trend_.design(train_.locations()));
    sol_ = sys.solve(p_.theta_ssp, train_.value_vector());
  }

  PredictionResult predict(std::span<const Location> u, bool) const override {
    check_locations(u);
    PredictionResult out;
    out.method = method_;
    out.mean.resize(u.size());
    const auto& locs = train_.locations();
    parallel_for(u.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        double acc = trend_.covariates(u[k]).dot(sol_.beta);
        for (std::size_t i = 0; i < locs.size(); ++i)
          acc += tps_kernel(u[k], locs[i]) * sol_.coef[static_cast<Eigen::Index>(i)];
        out.mean[k] = acc;
      }
    });
    return out;
  }

  nlohmann::json params_json() const override {
    nlohmann::json j = params_to_json(p_);
    j["beta"] = std::vector<double>(sol_.beta.data(), sol_.beta.data() + sol_.beta.size());
    return j;
  }

 private:
  SspParam p_;
  ThinPlateSystem::Solution sol_;
};

// ------------------------------------------------------------------ EDW

class EdwPredictor final : public FittedPredictor {
 public:
  EdwPredictor(SpatialDataset train, double theta)
      : FittedPredictor(Method::EDW, std::move(train), TrendSpec::intercept_only()), theta_(theta) {
    if (!(theta_ > 0.0) || !std::isfinite(theta_)) throw ConfigError("EDW: theta must be > 0");
    if (train_.empty()) throw DataError("EDW: no training data");
  }

  PredictionResult predict(std::span<const Location> u, bool) const override {
    check_locations(u);
    PredictionResult out;
    out.method = method_;
    out.mean.resize(u.size());
    const auto& locs = train_.locations();
    const auto& z = train_.values();
    parallel_for(u.size(), [&](std::size_t b, std::size_t e) {
      std::vector<double> d(locs.size());
      for (std::size_t k = b; k < e; ++k) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < locs.size(); ++i) {
          d[i] = distance(u[k], locs[i]);
          dmin = std::min(dmin, d[i]);
        }
        // Shift by the nearest distance so the largest weight is exactly 1.
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < locs.size(); ++i) {
          const double w = std::exp(-theta_ * (d[i] - dmin));
          num += w * z[i];
          den += w;
        }
        const double zmin = *std::min_element(z.begin(), z.end());
        const double zmax = *std::max_element(z.begin(), z.end());
        out.mean[k] = std::clamp(num / den, zmin, zmax);
      }
    });
    return out;
  }

  nlohmann::json params_json() const override { return {{"theta_edw", theta_}}; }

 private:
  double theta_;
};

}  // namespace

std::unique_ptr<FittedPredictor> make_tsk(const SpatialDataset& train, const TrendSpec& trend,
                                          const TskParams& p, double sigma_eps_sq) {
  return std::make_unique<TskPredictor>(train, trend, p, sigma_eps_sq);
}

std::unique_ptr<FittedPredictor> make_ssp(const SpatialDataset& train, const TrendSpec& trend,
                                          const SspParam& p) {
  return std::make_unique<SspPredictor>(train, trend, p);
}

std::unique_ptr<FittedPredictor> make_edw(const SpatialDataset& train, double theta) {
  return std::make_unique<EdwPredictor>(train, theta);
}

std::vector<double> ols_surface(const SpatialDataset& train, const TrendSpec& trend,
                                std::span<const Location> u) {
  const Eigen::VectorXd beta = ols_beta(trend.design(train.locations()), train.value_vector());
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = trend.covariates(u[k]).dot(beta);
  return out;
}

// ------------------------------------------------------------------ layouts

BisquareBasis default_frk_basis(const BoundingBox& domain, std::size_t n, const FrkConfig& c) {
  std::vector<std::pair<int, int>> levels;
  long total = 0;
  for (const auto& [nx, ny] : c.levels) {
    if (total + static_cast<long>(nx) * ny >= static_cast<long>(n)) break;
    levels.emplace_back(nx, ny);
    total += static_cast<long>(nx) * ny;
  }
  if (levels.empty()) {
    auto [nx, ny] = c.levels.front();
    while (static_cast<long>(nx) * ny >= static_cast<long>(n) && (nx > 1 || ny > 1)) {
      if (nx >= ny) --nx;
      else --ny;
    }
    levels.emplace_back(nx, ny);
  }
  return BisquareBasis::multiresolution(domain, levels, c.width_factor);
}

std::vector<Location> default_mpp_knots(const BoundingBox& domain, const MppConfig& c) {
  std::vector<Location> knots;
  knots.reserve(static_cast<std::size_t>(c.knots_nx) * c.knots_ny);
  for (int j = 0; j < c.knots_ny; ++j) {
    for (int i = 0; i < c.knots_nx; ++i) {
      // Cell centres of an nx x ny partition of the domain.
      knots.push_back({domain.lon_min + (i + 0.5) * domain.width() / c.knots_nx,
                       domain.lat_min + (j + 0.5) * domain.height() / c.knots_ny});
    }
  }
  return knots;
}

PiecewiseLinearBasis default_spd_mesh(const BoundingBox& domain, std::size_t n, const SpdConfig& c) {
  const double margin = c.margin_fraction * std::max(domain.width(), domain.height());
  const auto target = std::clamp(static_cast<long>(std::llround(c.nodes_per_point * n)),
                                 c.min_nodes, c.max_nodes);
  return PiecewiseLinearBasis(RegularGrid::with_target_size(domain.expanded(margin), target, 0));
}

WendlandBasis default_ltk_basis(const BoundingBox& domain, std::size_t n, const LtkConfig& c) {
  const auto target = std::clamp(static_cast<long>(std::llround(c.nodes_per_point * n)),
                                 c.min_nodes, c.max_nodes);
  const RegularGrid g = RegularGrid::with_target_size(domain, target, c.margin_cells);
  return WendlandBasis(g, c.radius_factor * g.spacing);
}

// ------------------------------------------------------------------ dispatch

namespace {

void copy_diagnostics(FitLog& log, const FitDiagnostics& d) {
  log.converged = d.converged;
  log.iterations = d.iterations;
  log.initial_objective = d.initial_objective;
  log.final_objective = d.final_objective;
  log.warnings = d.warnings;
  log.details["trace"] = d.trace;
}

BoundingBox fit_domain(const SpatialDataset& train, const FitConfig& cfg) {
  BoundingBox box = cfg.domain ? *cfg.domain : train.bounding_box();
  // Degenerate boxes (all points on a line) get a unit extent.
  if (box.width() <= 0.0) box = {box.lon_min - 0.5, box.lat_min, box.lon_max + 0.5, box.lat_max};
  if (box.height() <= 0.0) box = {box.lon_min, box.lat_min - 0.5, box.lon_max, box.lat_max + 0.5};
  for (const auto& u : train.locations())
    if (!box.contains(u, 1e-9)) throw ConfigError("training data fall outside the configured domain");
  return box;
}

}  // namespace

std::unique_ptr<FittedPredictor> fit(Method m, const SpatialDataset& train, const FitConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("fit: empty training set");
  const TrendSpec& trend = cfg.trend;
  std::unique_ptr<FittedPredictor> out;
  switch (m) {
    case Method::TSK: {
      const TskFit f = ml_fit_tsk(train, trend, cfg.sigma_eps_sq, cfg.tsk);
      out = make_tsk(train, trend, f.params, cfg.sigma_eps_sq);
      copy_diagnostics(out->mutable_log(), f.diagnostics);
      break;
    }
    case Method::SSP: {
      const SspFit f = loocv_select_ssp(train, trend, cfg.ssp);
      out = make_ssp(train, trend, f.param);
      auto& log = out->mutable_log();
      log.warnings = f.warnings;
      log.details["grid"] = f.grid;
      nlohmann::json scores = nlohmann::json::array();
      for (double s : f.scores) scores.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr));
      log.details["loocv_scores"] = scores;
      break;
    }
    case Method::EDW: {
      out = make_edw(train, cfg.edw_theta);
      break;
    }
    case Method::FRK: {
      const BisquareBasis basis = default_frk_basis(fit_domain(train, cfg), train.size(), cfg.frk);
      if (basis.size() >= static_cast<Eigen::Index>(train.size()))
        throw ConfigError("FRK: basis size r = " + std::to_string(basis.size()) +
                          " must be below n = " + std::to_string(train.size()));
      const FrkFit f = em_fit_frk(train, trend, basis, cfg.sigma_eps_sq, cfg.frk.em);
      out = make_frk(train, trend, basis, f.params, cfg.sigma_eps_sq);
      copy_diagnostics(out->mutable_log(), f.diagnostics);
      out->mutable_log().details["r"] = basis.size();
      long configured = 0;
      for (const auto& [nx, ny] : cfg.frk.levels) configured += static_cast<long>(nx) * ny;
      if (basis.size() < configured)
        out->mutable_log().warnings.push_back("FRK: basis reduced to r = " +
                                              std::to_string(basis.size()) + " so that r < n");
      break;
    }
    case Method::MPP: {
      const BoundingBox box = fit_domain(train, cfg);
      std::vector<Location> knots = default_mpp_knots(box, cfg.mpp);
      MppPriors priors;
      if (cfg.mpp.priors) {
        priors = *cfg.mpp.priors;
      } else {
        const Eigen::VectorXd r =
            ols_residuals(trend.design(train.locations()), train.value_vector());
        priors = default_mpp_priors(train.locations(), r.squaredNorm() / r.size(), cfg.sigma_eps_sq);
      }
      MppChain chain = mcmc_fit_mpp(train, trend, knots, priors, cfg.mpp.chain);
      FitLog log;
      log.iterations = cfg.mpp.chain.burn_in + cfg.mpp.chain.chain_length * cfg.mpp.chain.thin;
      log.details["r"] = knots.size();
      log.details["priors"] = params_to_json(priors);
      log.details["priors_are_defaults"] = !cfg.mpp.priors.has_value();
      log.details["kappa_acceptance"] = chain.kappa_acceptance;
      log.details["rhat"] = {{"kappa", chain.rhat_kappa},
                             {"sigma_nu_sq", chain.rhat_sigma_nu_sq},
                             {"sigma_eps_sq", chain.rhat_sigma_eps_sq}};
      log.details["chain_length"] = cfg.mpp.chain.chain_length;
      log.details["burn_in"] = cfg.mpp.chain.burn_in;
      log.details["thin"] = cfg.mpp.chain.thin;
      out = make_mpp(train, trend, std::move(knots), std::move(chain), cfg.mpp.chain.seed,
                     cfg.mpp.max_prediction_draws);
      out->mutable_log() = std::move(log);
      break;
    }
    case Method::SPD: {
      const PiecewiseLinearBasis mesh =
          default_spd_mesh(fit_domain(train, cfg), train.size(), cfg.spd);
      const SpdFit f = eb_fit_spd(train, trend, mesh, cfg.spd.search);
      out = make_spd(train, trend, mesh, f.params);
      copy_diagnostics(out->mutable_log(), f.diagnostics);
      out->mutable_log().details["r"] = mesh.size();
      out->mutable_log().details["mesh"] = mesh.grid().to_json();
      break;
    }
    case Method::LTK: {
      const WendlandBasis basis = default_ltk_basis(fit_domain(train, cfg), train.size(), cfg.ltk);
      const LtkFit f = ml_fit_ltk(train, trend, basis, cfg.sigma_eps_sq, cfg.ltk.search);
      out = make_ltk(train, trend, basis, f.params, cfg.sigma_eps_sq);
      copy_diagnostics(out->mutable_log(), f.diagnostics);
      out->mutable_log().details["r"] = basis.size();
      out->mutable_log().details["grid"] = basis.grid().to_json();
      break;
    }
  }
  return out;
}

}  // namespace spb
