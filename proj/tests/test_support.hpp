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
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spb/data.hpp"

namespace spb::testing {

inline std::vector<Location> random_locations(std::size_t n, std::mt19937_64& rng,
                                              const BoundingBox& box = {0.0, 0.0, 10.0, 10.0}) {
  std::uniform_real_distribution<double> ux(box.lon_min, box.lon_max);
  std::uniform_real_distribution<double> uy(box.lat_min, box.lat_max);
  std::vector<Location> out(n);
  for (auto& u : out) u = {ux(rng), uy(rng)};
  return out;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double mean = 0.0,
                                         double sd = 1.0) {
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline SpatialDataset random_dataset(std::size_t n, std::uint64_t seed,
                                     const BoundingBox& box = {0.0, 0.0, 10.0, 10.0}) {
  std::mt19937_64 rng(seed);
  auto locs = random_locations(n, rng, box);
  auto vals = random_values(n, rng, 5.0, 2.0);
  return SpatialDataset(std::move(locs), std::move(vals));
}

inline Eigen::MatrixXd random_spd(Eigen::Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(r, r);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(r, r);
}

// Plain Gaussian conditioning with an explicit inverse:
// mean_k = c_k' Sigma^{-1} r, var_k = prior_k - c_k' Sigma^{-1} c_k.
struct DenseConditional {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

inline DenseConditional dense_conditional(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& c,
                                          const Eigen::VectorXd& prior,
                                          const Eigen::VectorXd& resid) {
  const Eigen::MatrixXd inv = sigma.fullPivLu().inverse();
  DenseConditional out;
  out.mean = c.transpose() * (inv * resid);
  out.var = prior - (c.transpose() * inv * c).diagonal();
  return out;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace spb::testing
