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

#include "spb/simulate.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <array>
#include <random>
#include <set>

#include "spb/error.hpp"
#include "spb/kernels.hpp"
#include "spb/linalg.hpp"

namespace spb {

using nlohmann::json;

void SimulationConfig::validate() const {
  if (n_points < 1) throw ConfigError("simulation needs n_points >= 1");
  if (!(theta > 0.0)) throw ConfigError("simulation needs theta > 0");
  if (sigma0_sq < 0.0 || sigma_xi_sq < 0.0 || sigma_eps_sq < 0.0) {
    throw ConfigError("simulation variances must be non-negative");
  }
  if (beta.empty() || beta.size() > 3) throw ConfigError("simulation beta must have 1 to 3 entries");
  if (!(domain.width() >= 0.0) || !(domain.height() >= 0.0)) {
    throw ConfigError("simulation domain is inverted");
  }
  validate_location({domain.lon_min, domain.lat_min});
  validate_location({domain.lon_max, domain.lat_max});
}

TrendSpec SimulationConfig::trend() const {
  using T = TrendSpec::Term;
  switch (beta.size()) {
    case 1: return TrendSpec({T::Intercept});
    case 2: return TrendSpec({T::Intercept, T::Latitude});
    default: return TrendSpec({T::Intercept, T::Latitude, T::Longitude});
  }
}

void to_json(json& j, const SimulationConfig& c) {
  j = json{{"domain", {c.domain.lon_min, c.domain.lat_min, c.domain.lon_max, c.domain.lat_max}},
           {"n_points", c.n_points},
           {"beta", c.beta},
           {"sigma0_sq", c.sigma0_sq},
           {"theta", c.theta},
           {"sigma_xi_sq", c.sigma_xi_sq},
           {"sigma_eps_sq", c.sigma_eps_sq},
           {"seed", c.seed}};
}

void from_json(const json& j, SimulationConfig& c) {
  static const char* known[] = {"domain", "n_points", "beta", "sigma0_sq", "theta",
                                "sigma_xi_sq", "sigma_eps_sq", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown simulation field '" + key + "'");
    }
  }
  SimulationConfig d;
  if (j.contains("domain")) {
    const auto b = j.at("domain").get<std::vector<double>>();
    if (b.size() != 4) throw ConfigError("domain must be [lon_min, lat_min, lon_max, lat_max]");
    d.domain = {b[0], b[1], b[2], b[3]};
  }
  d.n_points = j.value("n_points", d.n_points);
  d.beta = j.value("beta", d.beta);
  d.sigma0_sq = j.value("sigma0_sq", d.sigma0_sq);
  d.theta = j.value("theta", d.theta);
  d.sigma_xi_sq = j.value("sigma_xi_sq", d.sigma_xi_sq);
  d.sigma_eps_sq = j.value("sigma_eps_sq", d.sigma_eps_sq);
  d.seed = j.value("seed", d.seed);
  c = d;
}

SimulationMethod simulation_method_for(const SimulationConfig& cfg) {
  return cfg.n_points <= kDenseSimulationLimit ? SimulationMethod::Dense
                                               : SimulationMethod::SpectralFeatures;
}

std::string to_string(SimulationMethod m) {
  return m == SimulationMethod::Dense ? "dense_cholesky" : "spectral_features";
}

namespace {

Eigen::VectorXd draw_process_dense(const std::vector<Location>& locs, const ExponentialCov& cov,
                                   std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  DenseMatrix sigma(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      sigma(a, b) = sigma(b, a) =
          cov(distance(locs[static_cast<std::size_t>(a)], locs[static_cast<std::size_t>(b)]));
    }
  }
  const auto factor = CholeskyFactor::with_jitter(sigma);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return factor.lower() * z;
}

// The exponential covariance exp(-|h|/theta) in R^2 is the characteristic
// function of a bivariate Cauchy law, so frequencies w = z / (theta |g|)
// with z ~ N(0, I_2), g ~ N(0, 1) reproduce it exactly in expectation.
Eigen::VectorXd draw_process_spectral(const std::vector<Location>& locs, const ExponentialCov& cov,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::array<double, 3>> feats(kSpectralFeatures);
  for (auto& f : feats) {
    double g = 0.0;
    while (g == 0.0) g = normal(rng);
    const double scale = 1.0 / (cov.theta * std::abs(g));
    f[0] = normal(rng) * scale;
    f[1] = normal(rng) * scale;
    f[2] = phase(rng);
  }
  const double amp = std::sqrt(2.0 * cov.sigma0_sq / kSpectralFeatures);
  Eigen::VectorXd out(static_cast<Eigen::Index>(locs.size()));
  for (std::size_t i = 0; i < locs.size(); ++i) {
    double s = 0.0;
    for (const auto& f : feats) s += std::cos(f[0] * locs[i].lon + f[1] * locs[i].lat + f[2]);
    out[static_cast<Eigen::Index>(i)] = amp * s;
  }
  return out;
}

}  // namespace

SpatialDataset simulate_at(const SimulationConfig& cfg, std::vector<Location> locs) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e9955bd1e995ULL);
  const TrendSpec trend = cfg.trend();
  const Eigen::Map<const Eigen::VectorXd> beta(cfg.beta.data(), static_cast<Eigen::Index>(cfg.beta.size()));
  Eigen::VectorXd z = trend.design(locs) * beta;

  if (cfg.sigma0_sq > 0.0) {
    const ExponentialCov cov{cfg.sigma0_sq, cfg.theta};
    const bool dense = locs.size() <= kDenseSimulationLimit;
    z += dense ? draw_process_dense(locs, cov, rng) : draw_process_spectral(locs, cov, rng);
  }
  const double white = cfg.sigma_xi_sq + cfg.sigma_eps_sq;
  if (white > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(white));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += normal(rng);
  }
  return SpatialDataset(std::move(locs), std::vector<double>(z.data(), z.data() + z.size()));
}

SpatialDataset simulate(const SimulationConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ulon(cfg.domain.lon_min, cfg.domain.lon_max);
  std::uniform_real_distribution<double> ulat(cfg.domain.lat_min, cfg.domain.lat_max);
  std::vector<Location> locs;
  locs.reserve(cfg.n_points);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  while (locs.size() < cfg.n_points) {
    Location u{ulon(rng), ulat(rng)};
    if (seen.insert(canonical_key(u)).second) locs.push_back(u);
    if (seen.size() > 100 * cfg.n_points + 100) {
      throw ConfigError("simulation domain too small for distinct locations");
    }
  }
  return simulate_at(cfg, std::move(locs));
}

}  // namespace spb
