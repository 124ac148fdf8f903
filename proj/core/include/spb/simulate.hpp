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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/data.hpp"

namespace spb {

// Z(u) = x(u)'beta + nu(u) + xi(u) + eps(u), with nu a mean-zero Gaussian
// process with exponential covariance, xi and eps white noise. The trend
// terms are implied by beta's length: (1), (1, lat) or (1, lat, lon).
struct SimulationConfig {
  BoundingBox domain{-100.0, 30.0, -80.0, 50.0};
  std::size_t n_points = 500;
  std::vector<double> beta{385.0, 0.0};
  double sigma0_sq = 9.0;
  double theta = 5.0;
  double sigma_xi_sq = 0.5;
  double sigma_eps_sq = 5.6062;
  std::uint64_t seed = 1;

  void validate() const;
  TrendSpec trend() const;
};

void to_json(nlohmann::json& j, const SimulationConfig& c);
void from_json(const nlohmann::json& j, SimulationConfig& c);

enum class SimulationMethod { Dense, SpectralFeatures };

// Dense Cholesky simulation is exact and used up to this many points;
// beyond it the process is drawn with random Fourier features of the
// exponential covariance (exact second moments, asymptotically Gaussian).
inline constexpr std::size_t kDenseSimulationLimit = 3000;
inline constexpr int kSpectralFeatures = 4096;

SimulationMethod simulation_method_for(const SimulationConfig& cfg);
std::string to_string(SimulationMethod m);

// Uniform random locations in the domain; deterministic given cfg.seed.
SpatialDataset simulate(const SimulationConfig& cfg);

// Same draw at caller-chosen locations.
SpatialDataset simulate_at(const SimulationConfig& cfg, std::vector<Location> locations);

}  // namespace spb
