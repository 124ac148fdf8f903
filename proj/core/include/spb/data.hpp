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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spb {

// A point on the study domain, in degrees. Distances between locations are
// plain Euclidean in (lon, lat) degree space.
struct Location {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

double distance(const Location& a, const Location& b);

// Throws DataError when the location is non-finite or out of range.
void validate_location(const Location& u);

// Location snapped to a 1e-9 degree lattice; used for exact-equality tests
// such as the fine-scale indicator terms in kriging covariance vectors.
std::pair<std::int64_t, std::int64_t> canonical_key(const Location& u);
bool same_location(const Location& a, const Location& b);

struct BoundingBox {
  double lon_min = 0.0;
  double lat_min = 0.0;
  double lon_max = 0.0;
  double lat_max = 0.0;

  double width() const { return lon_max - lon_min; }
  double height() const { return lat_max - lat_min; }
  double diameter() const;
  bool contains(const Location& u, double slack = 0.0) const;
  BoundingBox expanded(double margin) const;

  static BoundingBox of(std::span<const Location> locs);
};

// Observed values Z(s_i) at distinct locations, with optional known
// heteroskedasticity weights V(s_i) > 0. Immutable once built.
class SpatialDataset {
 public:
  SpatialDataset() = default;
  SpatialDataset(std::vector<Location> locations, std::vector<double> values,
                 std::optional<std::vector<double>> weights = std::nullopt);

  std::size_t size() const { return locations_.size(); }
  bool empty() const { return locations_.empty(); }

  const std::vector<Location>& locations() const { return locations_; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<std::vector<double>>& weights() const { return weights_; }

  Eigen::VectorXd value_vector() const;
  // V(s_i), or all ones when no weights were given.
  Eigen::VectorXd weight_vector() const;

  BoundingBox bounding_box() const;
  SpatialDataset subset(std::span<const std::size_t> indices) const;

  // Order-sensitive FNV-1a digest of the canonical CSV rendering.
  std::uint64_t content_hash() const;

 private:
  std::vector<Location> locations_;
  std::vector<double> values_;
  std::optional<std::vector<double>> weights_;
};

struct CsvSchema {
  std::string lon = "lon";
  std::string lat = "lat";
  std::string value = "value";
  // Empty means "use a column named weight if present".
  std::string weight;
};

SpatialDataset load_csv(const std::string& path, const CsvSchema& schema = {});
void save_csv(const std::string& path, const SpatialDataset& data);

// Reads lon,lat columns only (prediction request files).
std::vector<Location> load_locations_csv(const std::string& path);

struct HoldoutSplit {
  SpatialDataset train;
  SpatialDataset validation;
  std::uint64_t seed = 0;
  double fraction = 0.0;
};

// Uniform sampling without replacement; |validation| = round(fraction * N).
HoldoutSplit split_holdout(const SpatialDataset& data, double fraction,
                           std::uint64_t seed);

// Large-scale covariates x(u). The first term is always the intercept.
class TrendSpec {
 public:
  enum class Term { Intercept, Latitude, Longitude };

  TrendSpec();  // (1, latitude)
  explicit TrendSpec(std::vector<Term> terms);

  static TrendSpec intercept_only();
  static TrendSpec intercept_latitude();

  std::size_t dim() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  Eigen::VectorXd covariates(const Location& u) const;
  Eigen::MatrixXd design(std::span<const Location> locs) const;

  std::vector<std::string> names() const;
  static TrendSpec from_names(const std::vector<std::string>& names);

 private:
  std::vector<Term> terms_;
};

}  // namespace spb
