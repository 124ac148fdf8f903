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

#include "spb/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "spb/error.hpp"

namespace spb {

using nlohmann::json;

std::vector<Location> RegularGrid::nodes() const {
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) out.push_back(node(i, j));
  }
  return out;
}

RegularGrid RegularGrid::covering(const BoundingBox& box, double spacing, int margin_cells) {
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");
  if (margin_cells < 0) throw ConfigError("grid margin must be non-negative");
  RegularGrid g;
  g.spacing = spacing;
  g.lon0 = box.lon_min - margin_cells * spacing;
  g.lat0 = box.lat_min - margin_cells * spacing;
  // Tiny tolerance so a box that is an exact multiple of the spacing does not
  // get an extra column from rounding noise.
  g.nx = static_cast<int>(std::ceil(box.width() / spacing - 1e-9)) + 1 + 2 * margin_cells;
  g.ny = static_cast<int>(std::ceil(box.height() / spacing - 1e-9)) + 1 + 2 * margin_cells;
  g.nx = std::max(g.nx, 2);
  g.ny = std::max(g.ny, 2);
  return g;
}

RegularGrid RegularGrid::with_target_size(const BoundingBox& box, Eigen::Index target_nodes,
                                          int margin_cells) {
  if (target_nodes < 4) throw ConfigError("grid needs at least 4 nodes");
  const double w = std::max(box.width(), 1e-6);
  const double h = std::max(box.height(), 1e-6);
  const auto count = [&](double s) {
    const double nx = std::ceil(w / s) + 1 + 2 * margin_cells;
    const double ny = std::ceil(h / s) + 1 + 2 * margin_cells;
    return nx * ny;
  };
  double lo = 1e-6 * std::max(w, h);
  double hi = 2.0 * std::max(w, h);
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (count(mid) > static_cast<double>(target_nodes)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return covering(box, hi, margin_cells);
}

json RegularGrid::to_json() const {
  return {{"lon0", lon0}, {"lat0", lat0}, {"spacing", spacing}, {"nx", nx}, {"ny", ny}};
}

RegularGrid RegularGrid::from_json(const json& j) {
  RegularGrid g;
  g.lon0 = j.at("lon0").get<double>();
  g.lat0 = j.at("lat0").get<double>();
  g.spacing = j.at("spacing").get<double>();
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  return g;
}

Eigen::VectorXd eval_basis(const Basis& b, const Location& u) {
  std::vector<BasisEntry> entries;
  b.evaluate(u, entries);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(b.size());
  for (const auto& e : entries) out[e.index] += e.value;
  return out;
}

DenseMatrix build_basis_matrix(const Basis& b, std::span<const Location> locs) {
  if (locs.empty()) throw DataError("basis matrix needs at least one location");
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(locs.size()), b.size());
  std::vector<BasisEntry> entries;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    entries.clear();
    b.evaluate(locs[i], entries);
    for (const auto& e : entries) out(static_cast<Eigen::Index>(i), e.index) += e.value;
  }
  return out;
}

SparseMatrix build_sparse_basis_matrix(const Basis& b, std::span<const Location> locs) {
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<BasisEntry> entries;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    entries.clear();
    b.evaluate(locs[i], entries);
    for (const auto& e : entries) {
      if (e.value != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(e.index), e.value);
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(locs.size()), b.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

namespace {

json locations_to_json(const std::vector<Location>& locs) {
  json arr = json::array();
  for (const auto& u : locs) arr.push_back({u.lon, u.lat});
  return arr;
}

std::vector<Location> locations_from_json(const json& arr) {
  std::vector<Location> out;
  for (const auto& p : arr) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

std::unique_ptr<Basis> basis_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "bisquare") {
    return std::make_unique<BisquareBasis>(locations_from_json(j.at("centers")),
                                           j.at("widths").get<std::vector<double>>());
  }
  if (kind == "wendland") {
    return std::make_unique<WendlandBasis>(RegularGrid::from_json(j.at("grid")),
                                           j.at("radius").get<double>());
  }
  if (kind == "piecewise_linear") {
    return std::make_unique<PiecewiseLinearBasis>(RegularGrid::from_json(j.at("grid")));
  }
  if (kind == "predictive_process") {
    ExponentialCov parent{j.at("sigma_nu_sq").get<double>(), 1.0 / j.at("kappa").get<double>()};
    return std::make_unique<PredictiveProcessBasis>(locations_from_json(j.at("knots")), parent);
  }
  throw ConfigError("unknown basis kind '" + kind + "'");
}

// ---------------------------------------------------------------- bisquare

BisquareBasis::BisquareBasis(std::vector<Location> centers, std::vector<double> widths)
    : centers_(std::move(centers)), widths_(std::move(widths)) {
  if (centers_.empty()) throw ConfigError("bisquare basis needs at least one centre");
  if (centers_.size() != widths_.size()) {
    throw ConfigError("bisquare basis needs one width per centre");
  }
  for (double w : widths_) {
    if (!(w > 0.0)) throw ConfigError("bisquare widths must be positive");
  }
  for (std::size_t a = 0; a < centers_.size(); ++a) {
    for (std::size_t b = a + 1; b < centers_.size(); ++b) {
      if (same_location(centers_[a], centers_[b])) {
        throw ConfigError("bisquare centres must be distinct");
      }
    }
  }
}

BisquareBasis BisquareBasis::multiresolution(const BoundingBox& box,
                                             const std::vector<std::pair<int, int>>& levels,
                                             double width_factor) {
  if (levels.empty()) throw ConfigError("bisquare basis needs at least one resolution");
  std::vector<Location> centers;
  std::vector<double> widths;
  const double w = std::max(box.width(), 1e-6);
  const double h = std::max(box.height(), 1e-6);
  for (const auto& [nx, ny] : levels) {
    if (nx < 1 || ny < 1) throw ConfigError("bisquare level counts must be positive");
    const double dx = w / nx;
    const double dy = h / ny;
    const double width = width_factor * std::min(dx, dy);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        centers.push_back({box.lon_min + (i + 0.5) * dx, box.lat_min + (j + 0.5) * dy});
        widths.push_back(width);
      }
    }
  }
  return BisquareBasis(std::move(centers), std::move(widths));
}

void BisquareBasis::evaluate(const Location& u, std::vector<BasisEntry>& out) const {
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    const double d = distance(u, centers_[k]);
    if (d < widths_[k]) {
      const double t = d / widths_[k];
      const double s = 1.0 - t * t;
      out.push_back({static_cast<Eigen::Index>(k), s * s});
    }
  }
}

json BisquareBasis::to_json() const {
  return {{"kind", kind()}, {"centers", locations_to_json(centers_)}, {"widths", widths_}};
}

// ---------------------------------------------------------------- wendland

WendlandBasis::WendlandBasis(RegularGrid grid, double radius) : grid_(grid), radius_(radius) {
  if (!(radius_ > 0.0)) throw ConfigError("Wendland support radius must be positive");
  if (grid_.nx < 1 || grid_.ny < 1 || !(grid_.spacing > 0.0)) {
    throw ConfigError("Wendland grid is empty");
  }
}

double WendlandBasis::profile(double d) {
  if (d >= 1.0) return 0.0;
  const double a = 1.0 - d;
  const double a2 = a * a;
  return a2 * a2 * a2 * (35.0 * d * d + 18.0 * d + 3.0) / 3.0;
}

void WendlandBasis::evaluate(const Location& u, std::vector<BasisEntry>& out) const {
  const double h = grid_.spacing;
  const int i0 = std::max(0, static_cast<int>(std::floor((u.lon - radius_ - grid_.lon0) / h)));
  const int i1 = std::min(grid_.nx - 1, static_cast<int>(std::ceil((u.lon + radius_ - grid_.lon0) / h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((u.lat - radius_ - grid_.lat0) / h)));
  const int j1 = std::min(grid_.ny - 1, static_cast<int>(std::ceil((u.lat + radius_ - grid_.lat0) / h)));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const double d = distance(u, grid_.node(i, j)) / radius_;
      if (d < 1.0) out.push_back({grid_.index(i, j), profile(d)});
    }
  }
}

json WendlandBasis::to_json() const {
  return {{"kind", kind()}, {"grid", grid_.to_json()}, {"radius", radius_}};
}

// ---------------------------------------------------------------- piecewise linear

PiecewiseLinearBasis::PiecewiseLinearBasis(RegularGrid grid) : grid_(grid) {
  if (grid_.nx < 2 || grid_.ny < 2 || !(grid_.spacing > 0.0)) {
    throw ConfigError("piecewise-linear mesh needs at least 2 x 2 nodes");
  }
}

bool PiecewiseLinearBasis::covers(const Location& u) const {
  return grid_.hull().contains(u, 1e-9 * grid_.spacing);
}

void PiecewiseLinearBasis::evaluate(const Location& u, std::vector<BasisEntry>& out) const {
  if (!covers(u)) {
    throw DataError("location (" + std::to_string(u.lon) + ", " + std::to_string(u.lat) +
                    ") lies outside the piecewise-linear mesh hull");
  }
  const double x = std::clamp((u.lon - grid_.lon0) / grid_.spacing, 0.0, grid_.nx - 1.0);
  const double y = std::clamp((u.lat - grid_.lat0) / grid_.spacing, 0.0, grid_.ny - 1.0);
  const int i = std::min(static_cast<int>(std::floor(x)), grid_.nx - 2);
  const int j = std::min(static_cast<int>(std::floor(y)), grid_.ny - 2);
  const double fx = x - i;
  const double fy = y - j;
  auto push = [&out](Eigen::Index k, double v) {
    if (v > 0.0) out.push_back({k, v});
  };
  push(grid_.index(i, j), 1.0 - std::max(fx, fy));
  if (fx >= fy) {
    push(grid_.index(i + 1, j), fx - fy);
  } else {
    push(grid_.index(i, j + 1), fy - fx);
  }
  push(grid_.index(i + 1, j + 1), std::min(fx, fy));
}

namespace {

// Visits every triangle of the mesh as three node indices.
template <typename F>
void for_each_triangle(const RegularGrid& g, F&& f) {
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      f(std::array<Eigen::Index, 3>{g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1)});
      f(std::array<Eigen::Index, 3>{g.index(i, j), g.index(i + 1, j + 1), g.index(i, j + 1)});
    }
  }
}

}  // namespace

SparseMatrix PiecewiseLinearBasis::stiffness() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(grid_.size()) * 18);
  for_each_triangle(grid_, [&](const std::array<Eigen::Index, 3>& tri) {
    std::array<Location, 3> p{grid_.node(tri[0]), grid_.node(tri[1]), grid_.node(tri[2])};
    // Edge opposite vertex a, rotated: grad(phi_a) = perp(e_a) / (2A).
    std::array<std::array<double, 2>, 3> e;
    for (int a = 0; a < 3; ++a) {
      const Location& p1 = p[static_cast<std::size_t>((a + 1) % 3)];
      const Location& p2 = p[static_cast<std::size_t>((a + 2) % 3)];
      e[static_cast<std::size_t>(a)] = {p2.lon - p1.lon, p2.lat - p1.lat};
    }
    const double area2 = std::abs(e[0][0] * e[1][1] - e[0][1] * e[1][0]);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        const double v = (e[a][0] * e[b][0] + e[a][1] * e[b][1]) / (2.0 * area2);
        trips.emplace_back(static_cast<int>(tri[a]), static_cast<int>(tri[b]), v);
      }
    }
  });
  SparseMatrix g(grid_.size(), grid_.size());
  g.setFromTriplets(trips.begin(), trips.end());
  g.prune(0.0, 0.0);
  return g;
}

Eigen::VectorXd PiecewiseLinearBasis::lumped_mass() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(grid_.size());
  const double third = grid_.spacing * grid_.spacing / 2.0 / 3.0;
  for_each_triangle(grid_, [&](const std::array<Eigen::Index, 3>& tri) {
    for (auto k : tri) c[k] += third;
  });
  return c;
}

json PiecewiseLinearBasis::to_json() const {
  return {{"kind", kind()}, {"grid", grid_.to_json()}};
}

// ---------------------------------------------------------------- predictive process

namespace {

DenseMatrix knot_covariance(const std::vector<Location>& knots, const ExponentialCov& c) {
  const auto r = static_cast<Eigen::Index>(knots.size());
  DenseMatrix k(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      k(a, b) = k(b, a) = c(distance(knots[static_cast<std::size_t>(a)], knots[static_cast<std::size_t>(b)]));
    }
  }
  return k;
}

}  // namespace

PredictiveProcessBasis::PredictiveProcessBasis(std::vector<Location> knots, ExponentialCov parent)
    : knots_(std::move(knots)),
      parent_(parent),
      knot_cov_((parent_.validate(), knot_covariance(knots_, parent_))),
      knot_factor_(CholeskyFactor::with_jitter(knot_cov_)) {
  if (knots_.empty()) throw ConfigError("predictive-process basis needs at least one knot");
}

Eigen::VectorXd PredictiveProcessBasis::cross_cov(const Location& u) const {
  Eigen::VectorXd k(size());
  for (Eigen::Index a = 0; a < size(); ++a) k[a] = parent_(distance(u, knots_[static_cast<std::size_t>(a)]));
  return k;
}

void PredictiveProcessBasis::evaluate(const Location& u, std::vector<BasisEntry>& out) const {
  const Eigen::VectorXd s = knot_factor_.solve(cross_cov(u));
  for (Eigen::Index a = 0; a < size(); ++a) out.push_back({a, s[a]});
}

json PredictiveProcessBasis::to_json() const {
  return {{"kind", kind()},
          {"knots", locations_to_json(knots_)},
          {"sigma_nu_sq", parent_.sigma0_sq},
          {"kappa", 1.0 / parent_.theta}};
}

}  // namespace spb
