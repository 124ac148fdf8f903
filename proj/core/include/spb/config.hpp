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
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/data.hpp"
#include "spb/estimation.hpp"
#include "spb/evaluation.hpp"
#include "spb/simulate.hpp"

namespace spb {

enum class Method { TSK, SSP, EDW, FRK, MPP, SPD, LTK };

inline constexpr Method kAllMethods[] = {Method::TSK, Method::SSP, Method::EDW, Method::FRK,
                                         Method::MPP, Method::SPD, Method::LTK};

std::string to_string(Method m);
Method parse_method(const std::string& tag);                   // case-insensitive
std::vector<Method> parse_method_list(const std::string& csv); // "TSK,FRK" or "all"
bool has_variance(Method m);                                   // false for EDW and SSP

struct FrkConfig {
  // (nx, ny) centre counts per resolution; the default gives r = 24 + 72 = 96.
  std::vector<std::pair<int, int>> levels{{6, 4}, {12, 6}};
  double width_factor = 1.5;
  FrkOptions em;
};

struct MppConfig {
  int knots_nx = 8;
  int knots_ny = 8;
  MppOptions chain;
  // Unset fields fall back to default_mpp_priors().
  std::optional<MppPriors> priors;
  int max_prediction_draws = 1000;
};

struct SpdConfig {
  double margin_fraction = 0.1;
  double nodes_per_point = 2.0;
  long min_nodes = 400;
  long max_nodes = 20000;
  SpdOptions search;
};

struct LtkConfig {
  double radius_factor = 2.5;  // Wendland support in grid spacings
  int margin_cells = 2;
  double nodes_per_point = 1.2;
  long min_nodes = 100;
  long max_nodes = 4096;
  LtkOptions search;
};

struct FitConfig {
  TrendSpec trend;  // (1, latitude)
  double sigma_eps_sq = 5.6062;
  double edw_theta = 1.0;
  TskOptions tsk;
  SspOptions ssp;
  FrkConfig frk;
  MppConfig mpp;
  SpdConfig spd;
  LtkConfig ltk;
  // Region that bases and meshes must cover; defaults to the training box.
  std::optional<BoundingBox> domain;

  void validate() const;
};

void to_json(nlohmann::json& j, const FitConfig& c);
void from_json(const nlohmann::json& j, FitConfig& c);

struct RunConfig {
  std::string data;        // input CSV; empty means simulate
  std::string validation;  // optional explicit validation CSV (skips the split)
  std::string model;       // fitted-predictor file for `predict`
  std::string locations;   // prediction locations CSV for `predict`
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  double split_fraction = 0.2;
  std::uint64_t seed = 1;
  std::optional<RasterSpec> raster;  // default: 1 degree over the study box
  double raster_step = 1.0;
  std::optional<double> lag_unit;    // default: raster step
  double lag_tol = 1e-6;
  PmccSign pmcc_sign = PmccSign::Paper;
  std::string out = "out";
  SimulationConfig simulation;
  FitConfig fit;

  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::string& path);

// Stable FNV-1a hash of the canonical JSON dump.
std::uint64_t config_hash(const nlohmann::json& j);
std::string hex64(std::uint64_t v);

}  // namespace spb
