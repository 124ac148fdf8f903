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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/simulate.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

TEST(OlsBeta, InterceptOnlyIsMean) {
  const Eigen::VectorXd z = Eigen::Vector4d(1.0, 2.0, 3.5, -1.0);
  EXPECT_NEAR(ols_beta(DenseMatrix::Ones(4, 1), z)[0], z.mean(), 1e-15);
}

TEST(OlsBeta, ExactLinearData) {
  std::mt19937_64 rng(1);
  DenseMatrix X(20, 3);
  X.col(0).setOnes();
  X.col(1) = Eigen::VectorXd::Random(20);
  X.col(2) = Eigen::VectorXd::Random(20);
  const Eigen::Vector3d beta(385.0, -2.0, 0.25);
  EXPECT_LT((ols_beta(X, X * beta) - beta).norm(), 1e-10);
}

TEST(OlsBeta, NormalEquationsInLongDouble) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const int n = 20;
  DenseMatrix X(n, 2);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = 30.0 + 20.0 * std::abs(g(rng));
    z[i] = 380.0 + g(rng);
  }
  long double sxx = 0, sx = 0, sz = 0, sxz = 0;
  for (int i = 0; i < n; ++i) {
    sx += X(i, 1);
    sxx += static_cast<long double>(X(i, 1)) * X(i, 1);
    sz += z[i];
    sxz += static_cast<long double>(X(i, 1)) * z[i];
  }
  const long double det = n * sxx - sx * sx;
  const long double b1 = (n * sxz - sx * sz) / det;
  const long double b0 = (sz - b1 * sx) / n;
  const Eigen::VectorXd got = ols_beta(X, z);
  EXPECT_NEAR(got[0], static_cast<double>(b0), 1e-9);
  EXPECT_NEAR(got[1], static_cast<double>(b1), 1e-11);
}

TEST(OlsBeta, RankDeficientThrows) {
  DenseMatrix X(5, 2);
  X.col(0).setOnes();
  X.col(1).setConstant(2.0);
  EXPECT_THROW(ols_beta(X, Eigen::VectorXd::Ones(5)), NumericalError);
}

TEST(TskLoglik, MatchesDenseDensity) {
  std::mt19937_64 rng(3);
  const auto locs = testing::random_locations(15, rng);
  const Eigen::VectorXd r = Eigen::VectorXd::Random(15);
  const double theta = 2.0, s0 = 3.0, xi = 0.4, eps = 0.6;
  DenseMatrix sigma(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      sigma(i, j) = s0 * std::exp(-distance(locs[i], locs[j]) / theta) + (i == j ? xi + eps : 0.0);
  const double logdet = std::log(sigma.fullPivLu().determinant());
  const double quad = r.dot(sigma.fullPivLu().solve(r));
  const double want = -0.5 * (15 * std::log(2 * std::numbers::pi) + logdet + quad);
  EXPECT_NEAR(tsk_loglik(locs, r, theta, s0, xi, eps), want, 1e-9);
}

TEST(MlFitTsk, LikelihoodAscent) {
  SimulationConfig c;
  c.n_points = 120;
  c.seed = 4;
  c.sigma_eps_sq = 1.0;
  const auto d = simulate(c);
  const auto f = ml_fit_tsk(d, TrendSpec(), 1.0);
  EXPECT_GE(f.diagnostics.final_objective, f.diagnostics.initial_objective);
  EXPECT_GT(f.params.theta, 0.0);
  EXPECT_GE(f.params.sigma_xi_sq, 0.0);
}

TEST(MlFitTsk, RecoversRangeAcrossSeeds) {
  SimulationConfig c;
  c.n_points = 300;
  c.theta = 5.0;
  c.sigma0_sq = 9.0;
  c.sigma_xi_sq = 1.0;
  c.sigma_eps_sq = 1.0;
  int within = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    c.seed = s;
    const auto f = ml_fit_tsk(simulate(c), TrendSpec(), c.sigma_eps_sq);
    if (f.params.theta >= c.theta / 2.0 && f.params.theta <= c.theta * 2.0) ++within;
  }
  EXPECT_GE(within, 16);
}

TEST(MlFitTsk, RefusesLargeN) {
  std::vector<Location> locs;
  std::vector<double> vals;
  for (int i = 0; i < 3001; ++i) {
    locs.push_back({static_cast<double>(i % 60), static_cast<double>(i / 60)});
    vals.push_back(1.0);
  }
  EXPECT_THROW(ml_fit_tsk(SpatialDataset(locs, vals), TrendSpec(), 1.0), InfeasibleError);
}

}  // namespace
}  // namespace spb
