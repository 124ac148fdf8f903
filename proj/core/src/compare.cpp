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

#include "spb/compare.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "spb/error.hpp"
#include "spb/metering.hpp"
#include "spb/predictors.hpp"

namespace spb {

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

BoundingBox union_box(const HoldoutSplit& split) {
  std::vector<Location> all = split.train.locations();
  all.insert(all.end(), split.validation.locations().begin(), split.validation.locations().end());
  return BoundingBox::of(all);
}

nlohmann::json opt_num(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

ComparisonReport compare(const HoldoutSplit& split, const CompareOptions& opt) {
  if (split.train.empty() || split.validation.empty())
    throw DataError("compare: train and validation sets must be non-empty");
  ComparisonReport rep;
  rep.n_train = split.train.size();
  rep.n_validation = split.validation.size();
  rep.split_fraction = split.fraction;
  rep.split_seed = split.seed;
  rep.pmcc_sign = opt.pmcc_sign;
  rep.platform = platform_string();
  rep.timestamp = utc_timestamp();
  rep.config = opt.config;
  rep.config_hash = hex64(config_hash(opt.config));

  const BoundingBox study = union_box(split);
  rep.raster = opt.raster ? *opt.raster : RasterSpec::covering(study, opt.raster_step);
  rep.lag_unit = opt.lag_unit ? *opt.lag_unit : rep.raster.step;
  const std::vector<Location> grid = rep.raster.locations();

  // Bases and meshes must cover validation points and the raster too.
  FitConfig fc = opt.fit;
  if (!fc.domain) {
    BoundingBox d = study;
    d.lon_min = std::min(d.lon_min, rep.raster.lon0);
    d.lat_min = std::min(d.lat_min, rep.raster.lat0);
    d.lon_max = std::max(d.lon_max, rep.raster.lon0 + (rep.raster.nx() - 1) * rep.raster.step);
    d.lat_max = std::max(d.lat_max, rep.raster.lat0 + (rep.raster.ny() - 1) * rep.raster.step);
    fc.domain = d;
  }

  const std::vector<double>& truth = split.validation.values();
  const auto& vlocs = split.validation.locations();
  for (Method m : opt.methods) {
    MetricRow row;
    row.method = m;
    PredictionResult val;
    PredictionResult map;
    std::unique_ptr<FittedPredictor> f;
    Meter meter;
    try {
      f = fit(m, split.train, fc);
      val = f->predict(vlocs, has_variance(m));
      map = f->predict(grid, false);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    const MeterReading reading = meter.stop();
    row.cpu_minutes = reading.cpu_minutes;
    row.peak_memory_mb = reading.peak_memory_mb;
    rep.memory_method = reading.memory_method;
    if (!row.failed) {
      row.warnings = f->log().warnings;
      row.fit_log = {{"converged", f->log().converged},
                     {"iterations", f->log().iterations},
                     {"initial_objective", f->log().initial_objective},
                     {"final_objective", f->log().final_objective},
                     {"params", f->params_json()},
                     {"details", f->log().details}};
      if (m == Method::MPP) row.fit_log["params"].erase("samples");
      row.validation_mean = val.mean;
      try {
        row.rste = rste(val.mean, truth);
        if (val.variance) {
          row.validation_variance = *val.variance;
          row.pmcc = pmcc(val.mean, *val.variance, truth, opt.pmcc_sign);
        }
      } catch (const std::exception& e) {
        row.warnings.push_back(std::string("metric: ") + e.what());
      }
      try {
        row.lag1_semivariogram =
            lag1_semivariogram(Raster{rep.raster, map.mean}, rep.lag_unit, opt.lag_tol);
      } catch (const std::exception& e) {
        row.warnings.push_back(std::string("semivariogram: ") + e.what());
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream out;
  out << kReportHeader << "\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ",";
    if (r.failed) {
      out << "FAILED,FAILED,FAILED,";
    } else {
      out << fmt(r.rste, "%.4f") << ",";
      out << (has_variance(r.method) ? (r.pmcc ? fmt(*r.pmcc, "%.4f") : std::string("NaN"))
                                     : std::string("N/A"))
          << ",";
      out << (r.lag1_semivariogram ? fmt(*r.lag1_semivariogram, "%.4f") : std::string("NaN")) << ",";
    }
    out << fmt(r.cpu_minutes, "%.4f") << ",";
    out << (r.peak_memory_mb ? fmt(*r.peak_memory_mb, "%.2f") : std::string("N/A")) << "\n";
  }
  return out.str();
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"predictor", to_string(r.method)},
                        {"failed", r.failed},
                        {"rste", r.failed ? nlohmann::json(nullptr) : nlohmann::json(r.rste)},
                        {"pmcc", has_variance(r.method) ? opt_num(r.pmcc) : nlohmann::json("N/A")},
                        {"lag1_semivariogram", opt_num(r.lag1_semivariogram)},
                        {"cpu_minutes", r.cpu_minutes},
                        {"peak_memory_mb", opt_num(r.peak_memory_mb)},
                        {"warnings", r.warnings},
                        {"fit_log", r.fit_log}};
    if (r.failed) j["error"] = r.error;
    rs.push_back(std::move(j));
  }
  return {{"columns", {"Predictor", "RSTE", "PMCC", "Lag-1 Semivariogram", "CPU Time (in minutes)",
                       "Peak Memory Usage (in MB)"}},
          {"rows", rs},
          {"split",
           {{"n_train", n_train}, {"n_validation", n_validation}, {"fraction", split_fraction},
            {"seed", split_seed}}},
          {"config_hash", config_hash},
          {"timestamp", timestamp},
          {"platform", platform},
          {"memory_method", memory_method},
          {"timing", "wall-clock minutes for fit + validation prediction + raster prediction"},
          {"pmcc_sign", to_string(pmcc_sign)},
          {"raster", raster.to_json()},
          {"lag_unit", lag_unit},
          {"config", config}};
}

}  // namespace spb
