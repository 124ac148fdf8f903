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

#include "spb/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "spb/error.hpp"

namespace spb {

double rste(std::span<const double> predictions, std::span<const double> validation) {
  if (predictions.size() != validation.size()) throw DataError("rste: length mismatch");
  if (predictions.empty()) throw DataError("rste: empty validation set");
  double acc = 0.0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    const double e = validation[j] - predictions[j];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

PmccSign parse_pmcc_sign(const std::string& s) {
  if (s == "paper") return PmccSign::Paper;
  if (s == "score") return PmccSign::Score;
  throw ConfigError("pmcc sign must be 'paper' or 'score', got '" + s + "'");
}

std::string to_string(PmccSign s) { return s == PmccSign::Paper ? "paper" : "score"; }

double pmcc(std::span<const double> predictions, std::span<const double> variances,
            std::span<const double> validation, PmccSign sign) {
  if (predictions.size() != validation.size() || variances.size() != validation.size())
    throw DataError("pmcc: length mismatch");
  if (predictions.empty()) throw DataError("pmcc: empty validation set");
  const double s = sign == PmccSign::Paper ? -1.0 : 1.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    if (!(variances[j] > 0.0)) throw DataError("pmcc: variances must be > 0");
    const double e = validation[j] - predictions[j];
    acc += e * e / variances[j] + s * std::log(variances[j]);
  }
  return acc / static_cast<double>(predictions.size());
}

// ------------------------------------------------------------------ raster

RasterSpec RasterSpec::parse(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("raster: cannot parse '" + item + "' as a number");
    }
  }
  if (v.size() != 5) throw ConfigError("raster must be \"lon0,lat0,lon1,lat1,step\"");
  RasterSpec r{v[0], v[1], v[2], v[3], v[4]};
  r.validate();
  return r;
}

RasterSpec RasterSpec::covering(const BoundingBox& box, double step) {
  RasterSpec r{box.lon_min, box.lat_min, box.lon_max, box.lat_max, step};
  r.validate();
  return r;
}

void RasterSpec::validate() const {
  for (double x : {lon0, lat0, lon1, lat1, step})
    if (!std::isfinite(x)) throw ConfigError("raster: values must be finite");
  if (!(step > 0.0)) throw ConfigError("raster: step must be > 0");
  if (lon1 < lon0 || lat1 < lat0) throw ConfigError("raster: need lon0 <= lon1 and lat0 <= lat1");
  if (static_cast<double>(nx()) * ny() > 5e7) throw ConfigError("raster: too many nodes");
}

int RasterSpec::nx() const { return static_cast<int>(std::floor((lon1 - lon0) / step + 1e-9)) + 1; }
int RasterSpec::ny() const { return static_cast<int>(std::floor((lat1 - lat0) / step + 1e-9)) + 1; }

std::vector<Location> RasterSpec::locations() const {
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(nx()) * ny());
  for (int j = 0; j < ny(); ++j)
    for (int i = 0; i < nx(); ++i) out.push_back({lon0 + i * step, lat0 + j * step});
  return out;
}

std::string RasterSpec::to_string() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g", lon0, lat0, lon1, lat1, step);
  return buf;
}

nlohmann::json RasterSpec::to_json() const {
  return {{"lon0", lon0}, {"lat0", lat0}, {"lon1", lon1}, {"lat1", lat1}, {"step", step}};
}

RasterSpec RasterSpec::from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse(j.get<std::string>());
  RasterSpec r{j.at("lon0").get<double>(), j.at("lat0").get<double>(), j.at("lon1").get<double>(),
               j.at("lat1").get<double>(), j.at("step").get<double>()};
  r.validate();
  return r;
}

double lag1_semivariogram(const Raster& raster, double lag_unit, double tol) {
  const RasterSpec& s = raster.spec;
  const int nx = s.nx();
  const int ny = s.ny();
  if (raster.values.size() != static_cast<std::size_t>(nx) * ny)
    throw DataError("semivariogram: raster values do not match the grid");
  if (raster.values.size() < 2) throw DataError("semivariogram: need at least two nodes");
  if (!(lag_unit > 0.0) || !(tol >= 0.0)) throw ConfigError("semivariogram: invalid lag or tol");

  // Offsets (di, dj) in a half plane so each unordered pair is counted once.
  std::vector<std::pair<int, int>> offsets;
  const int reach = static_cast<int>(std::ceil((lag_unit + tol) / s.step));
  for (int dj = 0; dj <= reach; ++dj) {
    for (int di = -reach; di <= reach; ++di) {
      if (dj == 0 && di <= 0) continue;
      const double d = s.step * std::hypot(static_cast<double>(di), static_cast<double>(dj));
      if (std::abs(d - lag_unit) <= tol) offsets.emplace_back(di, dj);
    }
  }
  double acc = 0.0;
  long count = 0;
  for (const auto& [di, dj] : offsets) {
    for (int j = 0; j + dj < ny; ++j) {
      for (int i = std::max(0, -di); i < nx && i + di < nx; ++i) {
        const double a = raster.values[static_cast<std::size_t>(j) * nx + i];
        const double b = raster.values[static_cast<std::size_t>(j + dj) * nx + i + di];
        acc += (a - b) * (a - b);
        ++count;
      }
    }
  }
  if (count == 0) throw DataError("semivariogram: no node pairs at the requested lag");
  return acc / (2.0 * static_cast<double>(count));
}

double lag_semivariogram(std::span<const Location> locs, std::span<const double> values,
                         double lag_unit, double tol) {
  if (locs.size() != values.size()) throw DataError("semivariogram: length mismatch");
  double acc = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    for (std::size_t j = i + 1; j < locs.size(); ++j) {
      if (std::abs(distance(locs[i], locs[j]) - lag_unit) <= tol) {
        acc += (values[i] - values[j]) * (values[i] - values[j]);
        ++count;
      }
    }
  }
  if (count == 0) throw DataError("semivariogram: no pairs at the requested lag");
  return acc / (2.0 * static_cast<double>(count));
}

}  // namespace spb
