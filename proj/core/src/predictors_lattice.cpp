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
#include "spb/predictors.hpp"
#include "spb/serialize.hpp"

namespace spb {

namespace {

// Y(u) = x(u)' beta + s(u)' eta, eta ~ N(0, Q^{-1}), Z = Y + eps.
class GmrfPredictor final : public FittedPredictor {
 public:
  GmrfPredictor(Method m, SpatialDataset train, TrendSpec trend, std::unique_ptr<Basis> basis,
                const SparseMatrix& Q, Eigen::VectorXd beta, double noise_var, nlohmann::json params,
                const PiecewiseLinearBasis* mesh)
      : FittedPredictor(m, std::move(train), std::move(trend)),
        basis_(std::move(basis)),
        beta_(std::move(beta)),
        params_(std::move(params)),
        mesh_(mesh) {
    if (static_cast<std::size_t>(beta_.size()) != trend_.dim())
      throw ConfigError(to_string(m) + ": beta length does not match the trend");
    const auto& locs = train_.locations();
    const SparseMatrix S = build_sparse_basis_matrix(*basis_, locs);
    model_.emplace(S, Q, noise_var);
    mu_ = model_->posterior_mean(
        Eigen::VectorXd(train_.value_vector() - trend_.design(locs) * beta_));
  }

  PredictionResult predict(std::span<const Location> u, bool with_variance) const override {
    for (const auto& x : u) {
      validate_location(x);
      if (mesh_ && !mesh_->covers(x))
        throw DataError("SPD: location (" + std::to_string(x.lon) + ", " + std::to_string(x.lat) +
                        ") lies outside the mesh hull");
    }
    PredictionResult out;
    out.method = method_;
    out.mean.resize(u.size());
    const SparseMatrix A = build_sparse_basis_matrix(*basis_, u);
    const Eigen::VectorXd su = A * mu_;
    for (std::size_t k = 0; k < u.size(); ++k)
      out.mean[k] = trend_.covariates(u[k]).dot(beta_) + su[static_cast<Eigen::Index>(k)];
    if (with_variance) {
      const Eigen::VectorXd v = model_->posterior_variances(A);
      out.variance.emplace(u.size());
      for (std::size_t k = 0; k < u.size(); ++k)
        (*out.variance)[k] = std::max(v[static_cast<Eigen::Index>(k)], 0.0);
    }
    return out;
  }

  nlohmann::json params_json() const override { return params_; }
  nlohmann::json basis_json() const override { return basis_->to_json(); }

 private:
  std::unique_ptr<Basis> basis_;
  Eigen::VectorXd beta_;
  nlohmann::json params_;
  const PiecewiseLinearBasis* mesh_;
  std::optional<GmrfModel> model_;
  Eigen::VectorXd mu_;
};

}  // namespace

std::unique_ptr<FittedPredictor> make_ltk(const SpatialDataset& train, const TrendSpec& trend,
                                          const WendlandBasis& basis, const LtkParams& p,
                                          double sigma_eps_sq) {
  if (!(p.sigma_eta_sq > 0.0) || !(p.kappa >= 0.0)) throw ConfigError("LTK: invalid parameters");
  if (!(sigma_eps_sq > 0.0)) throw ConfigError("LTK: sigma_eps_sq must be > 0");
  const SparseMatrix B = sar_matrix(basis.grid(), p.kappa);
  const SparseMatrix Q = SparseMatrix(B.transpose() * B) / p.sigma_eta_sq;
  nlohmann::json params = params_to_json(p);
  params["sigma_eps_sq"] = sigma_eps_sq;
  return std::make_unique<GmrfPredictor>(Method::LTK, train, trend,
                                         std::make_unique<WendlandBasis>(basis), Q, p.beta,
                                         sigma_eps_sq, std::move(params), nullptr);
}

std::unique_ptr<FittedPredictor> make_spd(const SpatialDataset& train, const TrendSpec& trend,
                                          const PiecewiseLinearBasis& mesh, const SpdParams& p) {
  if (!(p.kappa > 0.0) || !(p.sigma_nu_sq > 0.0) || !(p.sigma_eps_sq > 0.0))
    throw ConfigError("SPD: parameters must be > 0");
  for (const auto& u : train.locations())
    if (!mesh.covers(u)) throw DataError("SPD: mesh hull does not cover the training data");
  auto owned = std::make_unique<PiecewiseLinearBasis>(mesh);
  const PiecewiseLinearBasis* raw = owned.get();
  return std::make_unique<GmrfPredictor>(Method::SPD, train, trend, std::move(owned),
                                         spde_precision(mesh, p.kappa, p.sigma_nu_sq), p.beta,
                                         p.sigma_eps_sq, params_to_json(p), raw);
}

}  // namespace spb
