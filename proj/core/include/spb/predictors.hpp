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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/basis.hpp"
#include "spb/config.hpp"
#include "spb/data.hpp"
#include "spb/estimation.hpp"

namespace spb {

struct PredictionResult {
  Method method = Method::EDW;
  std::vector<double> mean;
  std::optional<std::vector<double>> variance;  // absent for EDW and SSP
};

struct FitLog {
  bool converged = true;
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<std::string> warnings;
  nlohmann::json details = nlohmann::json::object();  // r, grids, priors, traces
};

// A trained predictor. Immutable after construction, so predict() may be
// called concurrently.
class FittedPredictor {
 public:
  virtual ~FittedPredictor() = default;

  Method method() const { return method_; }
  const SpatialDataset& training() const { return train_; }
  const TrendSpec& trend() const { return trend_; }
  const FitLog& log() const { return log_; }
  FitLog& mutable_log() { return log_; }

  virtual PredictionResult predict(std::span<const Location> u, bool with_variance = true) const = 0;
  PredictionResult predict_one(const Location& u, bool with_variance = true) const {
    return predict(std::span<const Location>(&u, 1), with_variance);
  }

  virtual nlohmann::json params_json() const = 0;
  virtual nlohmann::json basis_json() const { return nullptr; }

 protected:
  FittedPredictor(Method m, SpatialDataset train, TrendSpec trend)
      : method_(m), train_(std::move(train)), trend_(std::move(trend)) {}

  // Index of the training point at u (canonical equality), or -1.
  long training_index(const Location& u) const;

  Method method_;
  SpatialDataset train_;
  TrendSpec trend_;
  FitLog log_;

 private:
  mutable std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, long>> index_;
  mutable bool indexed_ = false;
  void build_index() const;
};

// Estimate parameters for `m` on `train` and return the fitted predictor.
std::unique_ptr<FittedPredictor> fit(Method m, const SpatialDataset& train, const FitConfig& cfg);

// Construction from known parameters (no estimation).
std::unique_ptr<FittedPredictor> make_tsk(const SpatialDataset& train, const TrendSpec& trend,
                                          const TskParams& p, double sigma_eps_sq);
std::unique_ptr<FittedPredictor> make_ssp(const SpatialDataset& train, const TrendSpec& trend,
                                          const SspParam& p);
std::unique_ptr<FittedPredictor> make_edw(const SpatialDataset& train, double theta = 1.0);
std::unique_ptr<FittedPredictor> make_frk(const SpatialDataset& train, const TrendSpec& trend,
                                          const BisquareBasis& basis, const FrkParams& p,
                                          double sigma_eps_sq);
std::unique_ptr<FittedPredictor> make_ltk(const SpatialDataset& train, const TrendSpec& trend,
                                          const WendlandBasis& basis, const LtkParams& p,
                                          double sigma_eps_sq);
std::unique_ptr<FittedPredictor> make_spd(const SpatialDataset& train, const TrendSpec& trend,
                                          const PiecewiseLinearBasis& mesh, const SpdParams& p);
std::unique_ptr<FittedPredictor> make_mpp(const SpatialDataset& train, const TrendSpec& trend,
                                          std::vector<Location> knots, MppChain chain,
                                          std::uint64_t seed, int max_prediction_draws = 1000);

// Trend-only surface x(u)' beta_OLS; the baseline for sanity checks.
std::vector<double> ols_surface(const SpatialDataset& train, const TrendSpec& trend,
                                std::span<const Location> u);

// Default knot and mesh layouts used by fit().
// Keeps the coarsest resolutions whose total size stays below n; the first
// level is shrunk if it alone reaches n.
BisquareBasis default_frk_basis(const BoundingBox& domain, std::size_t n, const FrkConfig& c);
std::vector<Location> default_mpp_knots(const BoundingBox& domain, const MppConfig& c);
PiecewiseLinearBasis default_spd_mesh(const BoundingBox& domain, std::size_t n, const SpdConfig& c);
WendlandBasis default_ltk_basis(const BoundingBox& domain, std::size_t n, const LtkConfig& c);

// Minimum number of retained draws needed by MPP prediction.
inline constexpr std::size_t kMinMppDraws = 100;

}  // namespace spb
