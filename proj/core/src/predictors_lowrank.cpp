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
#include <numbers>

#include "spb/error.hpp"
#include "spb/parallel.hpp"
#include "spb/predictors.hpp"
#include "spb/serialize.hpp"

namespace spb {

namespace {

void check_locations(std::span<const Location> u) {
  for (const auto& x : u) validate_location(x);
}

// ------------------------------------------------------------------ FRK

class FrkPredictor final : public FittedPredictor {
 public:
  FrkPredictor(SpatialDataset train, TrendSpec trend, BisquareBasis basis, FrkParams p,
               double sigma_eps_sq)
      : FittedPredictor(Method::FRK, std::move(train), std::move(trend)),
        basis_(std::move(basis)),
        p_(std::move(p)),
        sigma_eps_sq_(sigma_eps_sq) {
    const Eigen::Index r = basis_.size();
    if (p_.K.rows() != r || p_.K.cols() != r) throw ConfigError("FRK: K does not match the basis");
    if (p_.sigma_xi_sq < 0.0 || sigma_eps_sq_ < 0.0) throw ConfigError("FRK: negative variance");
    if (static_cast<std::size_t>(p_.beta.size()) != trend_.dim())
      throw ConfigError("FRK: beta length does not match the trend");
    const auto& locs = train_.locations();
    DenseMatrix S = build_basis_matrix(basis_, locs);
    Eigen::VectorXd d = (sigma_eps_sq_ * train_.weight_vector()).array() + p_.sigma_xi_sq;
    if (d.minCoeff() <= 0.0) throw NumericalError("FRK: diagonal term must be positive");
    const SmwSolver solver(LowRankPlusDiag{S, p_.K, std::move(d)});
    alpha_ = solver.solve(Eigen::VectorXd(train_.value_vector() - trend_.design(locs) * p_.beta));
    k_st_alpha_ = p_.K * (S.transpose() * alpha_);
    si_sk_ = solver.solve(S) * p_.K;  // Sigma^{-1} S K
    h_ = p_.K * (S.transpose() * si_sk_);
    h_ = 0.5 * (h_ + h_.transpose());
    si_diag_ = solver.inverse_diagonal();
  }

  PredictionResult predict(std::span<const Location> u, bool with_variance) const override {
    check_locations(u);
    PredictionResult out;
    out.method = method_;
    out.mean.resize(u.size());
    if (with_variance) out.variance.emplace(u.size());
    const double s2 = p_.sigma_xi_sq;
    parallel_for(u.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        const Eigen::VectorXd s = eval_basis(basis_, u[k]);
        const long idx = training_index(u[k]);
        double m = trend_.covariates(u[k]).dot(p_.beta) + s.dot(k_st_alpha_);
        if (idx >= 0) m += s2 * alpha_[idx];
        out.mean[k] = m;
        if (with_variance) {
          double v = s.dot(p_.K * s) + s2 - s.dot(h_ * s);
          if (idx >= 0) v -= 2.0 * s2 * si_sk_.row(idx).dot(s) + s2 * s2 * si_diag_[idx];
          (*out.variance)[k] = std::max(v, 0.0);
        }
      }
    });
    return out;
  }

  nlohmann::json params_json() const override {
    nlohmann::json j = params_to_json(p_);
    j["sigma_eps_sq"] = sigma_eps_sq_;
    return j;
  }
  nlohmann::json basis_json() const override { return basis_.to_json(); }

 private:
  BisquareBasis basis_;
  FrkParams p_;
  double sigma_eps_sq_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd k_st_alpha_;
  DenseMatrix si_sk_;
  DenseMatrix h_;
  Eigen::VectorXd si_diag_;
};

// ------------------------------------------------------------------ MPP

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Two standard normals determined by (seed, location, draw index).
std::pair<double, double> keyed_normals(std::uint64_t seed, const Location& u, std::uint64_t draw) {
  const auto key = canonical_key(u);
  std::uint64_t h = mix(seed);
  h = mix(h ^ static_cast<std::uint64_t>(key.first));
  h = mix(h ^ static_cast<std::uint64_t>(key.second));
  h = mix(h ^ draw);
  const double u1 = (static_cast<double>(mix(h ^ 1) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(mix(h ^ 2) >> 11) + 0.5) * 0x1.0p-53;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  return {rad * std::cos(2.0 * std::numbers::pi * u2), rad * std::sin(2.0 * std::numbers::pi * u2)};
}

class MppPredictor final : public FittedPredictor {
 public:
  MppPredictor(SpatialDataset train, TrendSpec trend, std::vector<Location> knots, MppChain chain,
               std::uint64_t seed, int max_draws)
      : FittedPredictor(Method::MPP, std::move(train), std::move(trend)),
        knots_(std::move(knots)),
        chain_(std::move(chain)),
        seed_(seed),
        max_draws_(max_draws) {
    if (knots_.empty()) throw ConfigError("MPP: no knots");
    if (max_draws_ < 1) throw ConfigError("MPP: max_prediction_draws must be >= 1");
    for (const auto& s : chain_.samples) {
      if (static_cast<std::size_t>(s.eta.size()) != knots_.size() ||
          static_cast<std::size_t>(s.params.beta.size()) != trend_.dim())
        throw ConfigError("MPP: chain does not match knots or trend");
    }
  }

  PredictionResult predict(std::span<const Location> u, bool with_variance) const override {
    check_locations(u);
    if (chain_.samples.size() < kMinMppDraws)
      throw ConfigError("MPP: chain too short for prediction (" +
                        std::to_string(chain_.samples.size()) + " draws, need " +
                        std::to_string(kMinMppDraws) + ")");
    PredictionResult out;
    out.method = method_;
    out.mean.assign(u.size(), 0.0);
    if (with_variance) out.variance.emplace(u.size(), 0.0);

    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const long idx = training_index(u[k]);
      if (idx >= 0) out.mean[k] = train_.values()[static_cast<std::size_t>(idx)];
      else free.push_back(k);
    }
    if (free.empty()) return out;

    const std::size_t L = chain_.samples.size();
    const std::size_t M = std::min<std::size_t>(L, static_cast<std::size_t>(max_draws_));
    const auto m = static_cast<Eigen::Index>(free.size());
    const auto r = static_cast<Eigen::Index>(knots_.size());
    DenseMatrix X(m, static_cast<Eigen::Index>(trend_.dim()));
    DenseMatrix dist(m, r);
    for (Eigen::Index a = 0; a < m; ++a) {
      X.row(a) = trend_.covariates(u[free[a]]).transpose();
      for (Eigen::Index j = 0; j < r; ++j) dist(a, j) = distance(u[free[a]], knots_[j]);
    }
    DenseMatrix kd(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) kd(i, j) = distance(knots_[i], knots_[j]);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(m);
    for (std::size_t t = 0; t < M; ++t) {
      const std::size_t l = (t * L) / M;  // evenly spaced retained draws
      const MppSample& s = chain_.samples[l];
      const double kappa = s.params.kappa;
      const DenseMatrix corr = (-kappa * kd.array()).exp().matrix();
      const CholeskyFactor f = CholeskyFactor::with_jitter(corr);
      const DenseMatrix cross = (-kappa * dist.array()).exp().matrix();
      const DenseMatrix A = f.solve(DenseMatrix(cross.transpose())).transpose();
      const Eigen::VectorXd delta = (1.0 - (A.array() * cross.array()).rowwise().sum()).max(0.0);
      const Eigen::VectorXd y = X * s.params.beta + A * s.eta;
      const double sx = std::sqrt(s.params.sigma_nu_sq);
      const double se = std::sqrt(s.params.sigma_eps_sq);
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto [g1, g2] = keyed_normals(seed_, u[free[a]], l);
        const double zdraw = y[a] + sx * std::sqrt(delta[a]) * g1 + se * g2;
        // Welford update.
        const double dlt = zdraw - mean[a];
        mean[a] += dlt / static_cast<double>(t + 1);
        m2[a] += dlt * (zdraw - mean[a]);
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      out.mean[free[a]] = mean[a];
      if (with_variance) (*out.variance)[free[a]] = M > 1 ? m2[a] / static_cast<double>(M - 1) : 0.0;
    }
    return out;
  }

  nlohmann::json params_json() const override {
    nlohmann::json j = params_to_json(chain_);
    j["seed"] = seed_;
    j["max_prediction_draws"] = max_draws_;
    return j;
  }

  nlohmann::json basis_json() const override {
    nlohmann::json k = nlohmann::json::array();
    for (const auto& x : knots_) k.push_back({x.lon, x.lat});
    return {{"kind", "knots"}, {"knots", k}};
  }

 private:
  std::vector<Location> knots_;
  MppChain chain_;
  std::uint64_t seed_;
  int max_draws_;
};

}  // namespace

std::unique_ptr<FittedPredictor> make_frk(const SpatialDataset& train, const TrendSpec& trend,
                                          const BisquareBasis& basis, const FrkParams& p,
                                          double sigma_eps_sq) {
  return std::make_unique<FrkPredictor>(train, trend, basis, p, sigma_eps_sq);
}

std::unique_ptr<FittedPredictor> make_mpp(const SpatialDataset& train, const TrendSpec& trend,
                                          std::vector<Location> knots, MppChain chain,
                                          std::uint64_t seed, int max_prediction_draws) {
  return std::make_unique<MppPredictor>(train, trend, std::move(knots), std::move(chain), seed,
                                        max_prediction_draws);
}

}  // namespace spb
