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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/data.hpp"

namespace spb {

// Root average squared testing error.
double rste(std::span<const double> predictions, std::span<const double> validation);

// Sign of the log-variance term in PMCC. Paper: minus (as printed).
// Score: plus (the proper scoring rule).
enum class PmccSign { Paper, Score };

PmccSign parse_pmcc_sign(const std::string& s);
std::string to_string(PmccSign s);

// (1/m) sum_j [ (z_j - yhat_j)^2 / var_j  +/-  log var_j ]
double pmcc(std::span<const double> predictions, std::span<const double> variances,
            std::span<const double> validation, PmccSign sign = PmccSign::Paper);

// Regular prediction grid over [lon0, lon1] x [lat0, lat1], both ends inclusive.
struct RasterSpec {
  double lon0 = 0.0;
  double lat0 = 0.0;
  double lon1 = 0.0;
  double lat1 = 0.0;
  double step = 1.0;

  // "lon0,lat0,lon1,lat1,step"
  static RasterSpec parse(const std::string& text);
  static RasterSpec covering(const BoundingBox& box, double step);
  void validate() const;

  int nx() const;
  int ny() const;
  // Row-major in latitude: index = j * nx + i.
  std::vector<Location> locations() const;

  std::string to_string() const;
  nlohmann::json to_json() const;
  static RasterSpec from_json(const nlohmann::json& j);
};

struct Raster {
  RasterSpec spec;
  std::vector<double> values;  // one per spec.locations() entry
};

// Half the mean squared difference over distinct node pairs whose separation
// lies within tol of lag_unit.
double lag1_semivariogram(const Raster& raster, double lag_unit, double tol = 1e-6);

// Same quantity over arbitrary points by brute force.
double lag_semivariogram(std::span<const Location> locs, std::span<const double> values,
                         double lag_unit, double tol = 1e-6);

}  // namespace spb
