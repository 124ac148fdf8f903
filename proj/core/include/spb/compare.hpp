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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/config.hpp"
#include "spb/data.hpp"
#include "spb/evaluation.hpp"

namespace spb {

struct MetricRow {
  Method method = Method::EDW;
  bool failed = false;
  std::string error;
  double rste = 0.0;
  std::optional<double> pmcc;  // absent for EDW and SSP
  std::optional<double> lag1_semivariogram;
  double cpu_minutes = 0.0;
  std::optional<double> peak_memory_mb;
  std::vector<std::string> warnings;
  nlohmann::json fit_log = nlohmann::json::object();
  std::vector<double> validation_mean;
  std::vector<double> validation_variance;
};

struct CompareOptions {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  FitConfig fit;
  std::optional<RasterSpec> raster;  // default: 1 degree over the study box
  double raster_step = 1.0;
  std::optional<double> lag_unit;    // default: raster step
  double lag_tol = 1e-6;
  PmccSign pmcc_sign = PmccSign::Paper;
  nlohmann::json config = nlohmann::json::object();  // recorded verbatim and hashed
};

struct ComparisonReport {
  std::vector<MetricRow> rows;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  double split_fraction = 0.0;
  std::uint64_t split_seed = 0;
  std::string config_hash;
  std::string timestamp;  // ISO 8601 UTC
  std::string platform;
  std::string memory_method;
  PmccSign pmcc_sign = PmccSign::Paper;
  RasterSpec raster;
  double lag_unit = 1.0;
  nlohmann::json config = nlohmann::json::object();

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

inline constexpr const char* kReportHeader =
    "Predictor,RSTE,PMCC,Lag-1 Semivariogram,CPU Time (in minutes),Peak Memory Usage (in MB)";

// Fits each method on split.train, predicts at the validation points and on
// the raster, and scores. Per-method failures become FAILED rows.
ComparisonReport compare(const HoldoutSplit& split, const CompareOptions& opt);

}  // namespace spb
