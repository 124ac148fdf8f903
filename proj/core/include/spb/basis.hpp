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

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spb/data.hpp"
#include "spb/kernels.hpp"
#include "spb/linalg.hpp"

namespace spb {

// Regular lattice of nx * ny nodes with equal spacing in both axes.
// Node (i, j) sits at (lon0 + i*spacing, lat0 + j*spacing) and has flat
// index j*nx + i.
struct RegularGrid {
  double lon0 = 0.0;
  double lat0 = 0.0;
  double spacing = 1.0;
  int nx = 1;
  int ny = 1;

  Eigen::Index size() const { return static_cast<Eigen::Index>(nx) * ny; }
  Eigen::Index index(int i, int j) const { return static_cast<Eigen::Index>(j) * nx + i; }
  Location node(int i, int j) const { return {lon0 + i * spacing, lat0 + j * spacing}; }
  Location node(Eigen::Index k) const {
    return node(static_cast<int>(k % nx), static_cast<int>(k / nx));
  }
  BoundingBox hull() const {
    return {lon0, lat0, lon0 + (nx - 1) * spacing, lat0 + (ny - 1) * spacing};
  }
  std::vector<Location> nodes() const;

  // Smallest grid with the given spacing that covers `box` plus `margin_cells`
  // extra cells on every side.
  static RegularGrid covering(const BoundingBox& box, double spacing, int margin_cells);
  // Spacing chosen so the covering grid has roughly `target_nodes` nodes.
  static RegularGrid with_target_size(const BoundingBox& box, Eigen::Index target_nodes,
                                      int margin_cells);

  nlohmann::json to_json() const;
  static RegularGrid from_json(const nlohmann::json& j);
};

struct BasisEntry {
  Eigen::Index index;
  double value;
};

// An r-dimensional vector of spatial basis functions S_r(u).
class Basis {
 public:
  virtual ~Basis() = default;

  virtual Eigen::Index size() const = 0;
  virtual std::string kind() const = 0;
  // Appends the nonzero components of S_r(u) to `out`.
  virtual void evaluate(const Location& u, std::vector<BasisEntry>& out) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

Eigen::VectorXd eval_basis(const Basis& b, const Location& u);
DenseMatrix build_basis_matrix(const Basis& b, std::span<const Location> locs);
SparseMatrix build_sparse_basis_matrix(const Basis& b, std::span<const Location> locs);

std::unique_ptr<Basis> basis_from_json(const nlohmann::json& j);

// Bisquare functions {1 - (d/w)^2}^2 for d <= w, zero beyond.
class BisquareBasis final : public Basis {
 public:
  BisquareBasis(std::vector<Location> centers, std::vector<double> widths);

  // One regular grid of cell-centred centres per (nx, ny) level; each level's
  // width is width_factor times its smallest centre spacing.
  static BisquareBasis multiresolution(const BoundingBox& box,
                                       const std::vector<std::pair<int, int>>& levels,
                                       double width_factor = 1.5);

  Eigen::Index size() const override { return static_cast<Eigen::Index>(centers_.size()); }
  std::string kind() const override { return "bisquare"; }
  void evaluate(const Location& u, std::vector<BasisEntry>& out) const override;
  nlohmann::json to_json() const override;

  const std::vector<Location>& centers() const { return centers_; }
  const std::vector<double>& widths() const { return widths_; }

 private:
  std::vector<Location> centers_;
  std::vector<double> widths_;
};

// Wendland phi(d) = (1-d)^6 (35 d^2 + 18 d + 3) / 3 on scaled distance
// d = dist / radius in [0, 1], centred on the nodes of a regular grid.
class WendlandBasis final : public Basis {
 public:
  WendlandBasis(RegularGrid grid, double radius);

  static double profile(double scaled_distance);

  Eigen::Index size() const override { return grid_.size(); }
  std::string kind() const override { return "wendland"; }
  void evaluate(const Location& u, std::vector<BasisEntry>& out) const override;
  nlohmann::json to_json() const override;

  const RegularGrid& grid() const { return grid_; }
  double radius() const { return radius_; }

 private:
  RegularGrid grid_;
  double radius_;
};

// Continuous piecewise-linear (P1) hat functions on a regular grid whose
// cells are split into two triangles along the (i,j)-(i+1,j+1) diagonal.
// Values are non-negative and sum to one anywhere inside the mesh hull.
class PiecewiseLinearBasis final : public Basis {
 public:
  explicit PiecewiseLinearBasis(RegularGrid grid);

  Eigen::Index size() const override { return grid_.size(); }
  std::string kind() const override { return "piecewise_linear"; }
  // Throws DataError when u lies outside the mesh hull.
  void evaluate(const Location& u, std::vector<BasisEntry>& out) const override;
  nlohmann::json to_json() const override;

  const RegularGrid& grid() const { return grid_; }
  bool covers(const Location& u) const;

  // Finite-element stiffness G_ij = integral grad(phi_i) . grad(phi_j).
  SparseMatrix stiffness() const;
  // Lumped (diagonal) mass C_ii = integral phi_i.
  Eigen::VectorXd lumped_mass() const;

 private:
  RegularGrid grid_;
};

// Predictive-process basis S(u)' = k(u)' (K*)^{-1} for an exponential parent
// covariance evaluated at a set of knots.
class PredictiveProcessBasis final : public Basis {
 public:
  PredictiveProcessBasis(std::vector<Location> knots, ExponentialCov parent);

  Eigen::Index size() const override { return static_cast<Eigen::Index>(knots_.size()); }
  std::string kind() const override { return "predictive_process"; }
  void evaluate(const Location& u, std::vector<BasisEntry>& out) const override;
  nlohmann::json to_json() const override;

  const std::vector<Location>& knots() const { return knots_; }
  const ExponentialCov& parent() const { return parent_; }
  // k(u) = (C(u, u_i*))_i
  Eigen::VectorXd cross_cov(const Location& u) const;
  const DenseMatrix& knot_cov() const { return knot_cov_; }

 private:
  std::vector<Location> knots_;
  ExponentialCov parent_;
  DenseMatrix knot_cov_;
  CholeskyFactor knot_factor_;
};

}  // namespace spb
