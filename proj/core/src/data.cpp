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

#include "spb/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "spb/error.hpp"

namespace spb {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(const std::string& field) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

}  // namespace

double distance(const Location& a, const Location& b) {
  return std::hypot(a.lon - b.lon, a.lat - b.lat);
}

void validate_location(const Location& u) {
  if (!std::isfinite(u.lon) || !std::isfinite(u.lat)) {
    throw DataError("location has non-finite coordinates");
  }
  if (u.lon < -180.0 || u.lon > 180.0 || u.lat < -90.0 || u.lat > 90.0) {
    std::ostringstream os;
    os << "location (" << u.lon << ", " << u.lat << ") outside [-180,180]x[-90,90]";
    throw DataError(os.str());
  }
}

std::pair<std::int64_t, std::int64_t> canonical_key(const Location& u) {
  return {static_cast<std::int64_t>(std::llround(u.lon * 1e9)),
          static_cast<std::int64_t>(std::llround(u.lat * 1e9))};
}

bool same_location(const Location& a, const Location& b) {
  return canonical_key(a) == canonical_key(b);
}

double BoundingBox::diameter() const { return std::hypot(width(), height()); }

bool BoundingBox::contains(const Location& u, double slack) const {
  return u.lon >= lon_min - slack && u.lon <= lon_max + slack &&
         u.lat >= lat_min - slack && u.lat <= lat_max + slack;
}

BoundingBox BoundingBox::expanded(double margin) const {
  return {lon_min - margin, lat_min - margin, lon_max + margin, lat_max + margin};
}

BoundingBox BoundingBox::of(std::span<const Location> locs) {
  if (locs.empty()) throw DataError("bounding box of an empty location set");
  BoundingBox box{locs[0].lon, locs[0].lat, locs[0].lon, locs[0].lat};
  for (const auto& u : locs) {
    box.lon_min = std::min(box.lon_min, u.lon);
    box.lon_max = std::max(box.lon_max, u.lon);
    box.lat_min = std::min(box.lat_min, u.lat);
    box.lat_max = std::max(box.lat_max, u.lat);
  }
  return box;
}

SpatialDataset::SpatialDataset(std::vector<Location> locations, std::vector<double> values,
                               std::optional<std::vector<double>> weights)
    : locations_(std::move(locations)), values_(std::move(values)), weights_(std::move(weights)) {
  if (locations_.size() != values_.size()) {
    throw DataError("dataset has different numbers of locations and values");
  }
  if (weights_ && weights_->size() != locations_.size()) {
    throw DataError("heteroskedasticity weights length does not match dataset size");
  }
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    validate_location(locations_[i]);
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value at point " + std::to_string(i));
    }
    if (weights_ && (!std::isfinite((*weights_)[i]) || (*weights_)[i] <= 0.0)) {
      throw DataError("weight at point " + std::to_string(i) + " must be positive");
    }
    const auto [it, inserted] = seen.emplace(canonical_key(locations_[i]), i);
    if (!inserted) {
      throw DataError("duplicate location at points " + std::to_string(it->second) + " and " +
                      std::to_string(i));
    }
  }
}

Eigen::VectorXd SpatialDataset::value_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

Eigen::VectorXd SpatialDataset::weight_vector() const {
  if (!weights_) return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(size()));
  return Eigen::Map<const Eigen::VectorXd>(weights_->data(), static_cast<Eigen::Index>(size()));
}

BoundingBox SpatialDataset::bounding_box() const { return BoundingBox::of(locations_); }

SpatialDataset SpatialDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Location> locs;
  std::vector<double> vals;
  std::optional<std::vector<double>> w;
  locs.reserve(indices.size());
  vals.reserve(indices.size());
  if (weights_) w.emplace().reserve(indices.size());
  for (std::size_t i : indices) {
    locs.push_back(locations_.at(i));
    vals.push_back(values_.at(i));
    if (weights_) w->push_back((*weights_)[i]);
  }
  return SpatialDataset(std::move(locs), std::move(vals), std::move(w));
}

std::uint64_t SpatialDataset::content_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t i = 0; i < size(); ++i) {
    mix(format_real(locations_[i].lon));
    mix(",");
    mix(format_real(locations_[i].lat));
    mix(",");
    mix(format_real(values_[i]));
    if (weights_) {
      mix(",");
      mix(format_real((*weights_)[i]));
    }
    mix("\n");
  }
  return h;
}

SpatialDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError(path + ": empty file");

  const int ilon = column_index(header, schema.lon);
  const int ilat = column_index(header, schema.lat);
  const int ival = column_index(header, schema.value);
  const int iw = column_index(header, schema.weight.empty() ? "weight" : schema.weight);
  if (ilon < 0 || ilat < 0 || ival < 0) {
    throw DataError(path + ": header must contain columns " + schema.lon + ", " + schema.lat +
                    ", " + schema.value);
  }
  if (!schema.weight.empty() && iw < 0) {
    throw DataError(path + ": missing weight column " + schema.weight);
  }

  std::vector<Location> locs;
  std::vector<double> vals;
  std::optional<std::vector<double>> weights;
  if (iw >= 0) weights.emplace();
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    auto field = [&](int idx) -> double {
      if (idx >= static_cast<int>(fields.size())) {
        throw DataError(path + ": malformed row at line " + std::to_string(line_no) +
                        " (too few fields)");
      }
      const auto v = parse_real(fields[static_cast<std::size_t>(idx)]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(path + ": malformed row at line " + std::to_string(line_no) +
                        " (field '" + fields[static_cast<std::size_t>(idx)] +
                        "' is not a finite real)");
      }
      return *v;
    };
    Location u{field(ilon), field(ilat)};
    const double z = field(ival);
    try {
      validate_location(u);
    } catch (const DataError& e) {
      throw DataError(path + ": malformed row at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    const auto [it, inserted] = seen.emplace(canonical_key(u), line_no);
    if (!inserted) {
      throw DataError(path + ": duplicate location at lines " + std::to_string(it->second) +
                      " and " + std::to_string(line_no));
    }
    locs.push_back(u);
    vals.push_back(z);
    if (weights) {
      const double w = field(iw);
      if (w <= 0.0) {
        throw DataError(path + ": malformed row at line " + std::to_string(line_no) +
                        " (weight must be positive)");
      }
      weights->push_back(w);
    }
  }
  if (locs.empty()) throw DataError(path + ": empty file (header only)");
  return SpatialDataset(std::move(locs), std::move(vals), std::move(weights));
}

void save_csv(const std::string& path, const SpatialDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << (data.weights() ? "lon,lat,value,weight\n" : "lon,lat,value\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_real(data.locations()[i].lon) << ',' << format_real(data.locations()[i].lat)
        << ',' << format_real(data.values()[i]);
    if (data.weights()) out << ',' << format_real((*data.weights())[i]);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

std::vector<Location> load_locations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError(path + ": empty file");
  const int ilon = column_index(header, "lon");
  const int ilat = column_index(header, "lat");
  if (ilon < 0 || ilat < 0) throw DataError(path + ": header must contain lon and lat");
  std::vector<Location> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max(ilon, ilat));
    std::optional<double> lon, lat;
    if (fields.size() > need) {
      lon = parse_real(fields[static_cast<std::size_t>(ilon)]);
      lat = parse_real(fields[static_cast<std::size_t>(ilat)]);
    }
    if (!lon || !lat) {
      throw DataError(path + ": malformed row at line " + std::to_string(line_no));
    }
    Location u{*lon, *lat};
    validate_location(u);
    out.push_back(u);
  }
  return out;
}

HoldoutSplit split_holdout(const SpatialDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie strictly between 0 and 1");
  }
  const std::size_t n_total = data.size();
  if (n_total < 2) throw DataError("hold-out split needs at least 2 points");
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_total)));
  if (m == 0 || m >= n_total) {
    throw DataError("dataset too small for a hold-out fraction of " + std::to_string(fraction));
  }

  std::vector<std::size_t> order(n_total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m slots become the validation set.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_total - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<std::size_t> trn(order.begin() + static_cast<std::ptrdiff_t>(m), order.end());
  std::sort(val.begin(), val.end());
  std::sort(trn.begin(), trn.end());
  return HoldoutSplit{data.subset(trn), data.subset(val), seed, fraction};
}

TrendSpec::TrendSpec() : terms_{Term::Intercept, Term::Latitude} {}

TrendSpec::TrendSpec(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty() || terms_.front() != Term::Intercept) {
    throw ConfigError("trend must start with the intercept term");
  }
}

TrendSpec TrendSpec::intercept_only() { return TrendSpec({Term::Intercept}); }
TrendSpec TrendSpec::intercept_latitude() { return TrendSpec(); }

Eigen::VectorXd TrendSpec::covariates(const Location& u) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    switch (terms_[k]) {
      case Term::Intercept: x[static_cast<Eigen::Index>(k)] = 1.0; break;
      case Term::Latitude: x[static_cast<Eigen::Index>(k)] = u.lat; break;
      case Term::Longitude: x[static_cast<Eigen::Index>(k)] = u.lon; break;
    }
  }
  return x;
}

Eigen::MatrixXd TrendSpec::design(std::span<const Location> locs) const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(locs.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < locs.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = covariates(locs[i]).transpose();
  }
  return X;
}

std::vector<std::string> TrendSpec::names() const {
  std::vector<std::string> out;
  for (Term t : terms_) {
    switch (t) {
      case Term::Intercept: out.emplace_back("intercept"); break;
      case Term::Latitude: out.emplace_back("lat"); break;
      case Term::Longitude: out.emplace_back("lon"); break;
    }
  }
  return out;
}

TrendSpec TrendSpec::from_names(const std::vector<std::string>& names) {
  std::vector<Term> terms;
  for (const auto& s : names) {
    if (s == "intercept" || s == "1") {
      terms.push_back(Term::Intercept);
    } else if (s == "lat" || s == "latitude") {
      terms.push_back(Term::Latitude);
    } else if (s == "lon" || s == "longitude") {
      terms.push_back(Term::Longitude);
    } else {
      throw ConfigError("unknown trend term '" + s + "'");
    }
  }
  return TrendSpec(std::move(terms));
}

}  // namespace spb
