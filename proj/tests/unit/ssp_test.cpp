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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/kernels.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

// Leave-one-out by refitting the thin-plate system n times.
double explicit_loocv(const std::vector<Location>& locs, const Eigen::VectorXd& z,
                      const TrendSpec& trend, double theta) {
  const auto n = locs.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Location> l;
    Eigen::VectorXd zz(static_cast<Eigen::Index>(n - 1));
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      l.push_back(locs[j]);
      zz[static_cast<Eigen::Index>(k++)] = z[static_cast<Eigen::Index>(j)];
    }
    const ThinPlateSystem sys(l, trend.design(l));
    const auto sol = sys.solve(theta, zz);
    double pred = trend.covariates(locs[i]).dot(sol.beta);
    for (std::size_t j = 0; j < l.size(); ++j)
      pred += tps_kernel(locs[i], l[j]) * sol.coef[static_cast<Eigen::Index>(j)];
    const double e = z[static_cast<Eigen::Index>(i)] - pred;
    acc += e * e;
  }
  return acc / static_cast<double>(n);
}

TEST(SspLoocv, ShortcutEqualsExplicitRefits) {
  const auto d = testing::random_dataset(25, 3);
  const TrendSpec trend;
  const ThinPlateSystem sys(d.locations(), trend.design(d.locations()));
  for (double theta : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
    const double want = explicit_loocv(d.locations(), d.value_vector(), trend, theta);
    EXPECT_NEAR(sys.loocv(theta, d.value_vector()), want, 1e-6 * std::max(1.0, want)) << theta;
  }
}

TEST(SspLoocv, SingleValueGrid) {
  const auto d = testing::random_dataset(20, 4);
  SspOptions opt;
  opt.grid = {0.37};
  EXPECT_DOUBLE_EQ(loocv_select_ssp(d, TrendSpec(), opt).param.theta_ssp, 0.37);
}

TEST(SspLoocv, NoiselessSmoothDataPrefersSmallPenalty) {
  std::mt19937_64 rng(5);
  const auto locs = testing::random_locations(80, rng);
  std::vector<double> z;
  for (const auto& u : locs) z.push_back(3.0 + 0.2 * u.lat + std::sin(u.lon / 3.0) * std::cos(u.lat / 4.0));
  SspOptions opt;
  const auto fit = loocv_select_ssp(SpatialDataset(locs, z), TrendSpec(), opt);
  const auto grid = opt.candidates();
  EXPECT_LE(fit.param.theta_ssp, grid[4]);
}

TEST(SspLoocv, HatDiagonalWithinUnitInterval) {
  const auto d = testing::random_dataset(30, 6);
  // With a full linear trend the kernel is conditionally positive definite.
  const auto trend = TrendSpec::from_names({"intercept", "lat", "lon"});
  const ThinPlateSystem sys(d.locations(), trend.design(d.locations()));
  const Eigen::VectorXd h = sys.hat_diagonal(1.0);
  EXPECT_GE(h.minCoeff(), -1e-12);
  EXPECT_LE(h.maxCoeff(), 1.0 + 1e-12);
}

TEST(SspLoocv, RefusesLargeN) {
  SspOptions opt;
  opt.max_n = 10;
  EXPECT_THROW(loocv_select_ssp(testing::random_dataset(11, 1), TrendSpec(), opt), InfeasibleError);
}

}  // namespace
}  // namespace spb
