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
#include "spb/kernels.hpp"

namespace spb {
namespace {

TEST(ExpCov, ClosedForm) {
  const ExponentialCov c{4.0, 2.0};
  EXPECT_DOUBLE_EQ(exp_cov(c, 0.0), 4.0);
  EXPECT_NEAR(exp_cov(c, 2.0), 4.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(exp_cov(c, 2.0), 1.4715, 1e-4);
}

TEST(ExpCov, MonotoneInDistance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  const ExponentialCov c{9.0, 5.0};
  for (int k = 0; k < 100; ++k) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_GT(c(a), c(b));
  }
}

TEST(ExpCov, RejectsBadParameters) {
  EXPECT_THROW((ExponentialCov{1.0, 0.0}).validate(), ConfigError);
  EXPECT_THROW((ExponentialCov{-1.0, 1.0}).validate(), ConfigError);
}

TEST(MaternCov, HalfMatchesExponential) {
  const MaternCov m{2.5, 0.7, 0.5};
  for (double h : {0.1, 1.0, 5.0}) EXPECT_NEAR(matern_cov(m, h), 2.5 * std::exp(-0.7 * h), 1e-10);
}

TEST(MaternCov, ZeroLagIsVariance) {
  for (double a : {0.5, 1.0, 1.5, 2.3}) EXPECT_DOUBLE_EQ(matern_cov({3.0, 1.2, a}, 0.0), 3.0);
}

TEST(MaternCov, AlphaOneAgainstLibraryBessel) {
  // sigma^2 / (Gamma(1) 2^0) * t * K_1(t) at t = kappa h = 1.
  const double want = 1.0 * std::cyl_bessel_k(1.0, 1.0);
  EXPECT_NEAR(matern_cov({1.0, 1.0, 1.0}, 1.0), want, 1e-12);
}

TEST(BesselK, MatchesLibraryOverOrders) {
  for (double nu : {0.5, 1.0, 1.5, 2.0, 2.5, 3.7}) {
    for (double x : {0.05, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      const double want = std::cyl_bessel_k(nu, x);
      EXPECT_NEAR(bessel_k(nu, x) / want, 1.0, 1e-10) << nu << " " << x;
    }
  }
}

TEST(TpsKernel, ClosedForms) {
  EXPECT_DOUBLE_EQ(tps_radial(1.0), 0.0);
  EXPECT_DOUBLE_EQ(tps_radial(0.0), 0.0);
  EXPECT_NEAR(tps_radial(std::numbers::e), std::numbers::e * std::numbers::e, 1e-12);
  EXPECT_NEAR(tps_kernel({0.0, 0.0}, {3.0, 4.0}), 25.0 * std::log(5.0), 1e-12);
}

}  // namespace
}  // namespace spb
