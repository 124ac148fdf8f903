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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spb/basis.hpp"
#include "spb/estimation.hpp"
#include "spb/simulate.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

TEST(FrkEm, SingleStepMatchesHandComputation) {
  // Three points, one basis function, unit weights.
  DenseMatrix S(3, 1);
  S << 1.0, 0.5, 0.25;
  const Eigen::Vector3d V(1.0, 1.0, 1.0);
  const Eigen::Vector3d r(1.0, -0.5, 2.0);
  const double eps = 0.3, k = 2.0, xi = 0.4;

  // E-step by hand: Sigma = k s s' + (xi + eps) I.
  DenseMatrix sigma = k * S * S.transpose();
  sigma.diagonal().array() += xi + eps;
  const DenseMatrix inv = sigma.inverse();
  const double mu = k * (S.transpose() * inv * r)(0, 0);
  const double pv = k - k * k * (S.transpose() * inv * S)(0, 0);
  const Eigen::Vector3d m_xi = xi * inv * r;
  const Eigen::Vector3d v_xi = (xi - xi * xi * inv.diagonal().array()).matrix();
  // M-step.
  const double k_want = pv + mu * mu;
  const double xi_want = (v_xi.sum() + m_xi.squaredNorm()) / 3.0;

  const FrkEmState next = frk_em_step(S, V, eps, r, FrkEmState{DenseMatrix::Constant(1, 1, k), xi});
  EXPECT_NEAR(next.K(0, 0), k_want, 1e-12);
  EXPECT_NEAR(next.sigma_xi_sq, xi_want, 1e-12);
}

TEST(FrkLoglik, MatchesDenseDensity) {
  std::mt19937_64 rng(2);
  const auto locs = testing::random_locations(30, rng);
  const auto basis = BisquareBasis::multiresolution({0, 0, 10, 10}, {{3, 3}}, 1.5);
  const DenseMatrix S = build_basis_matrix(basis, locs);
  const Eigen::VectorXd V = Eigen::VectorXd::LinSpaced(30, 0.5, 1.5);
  const FrkEmState st{testing::random_spd(9, rng), 0.2};
  const Eigen::VectorXd r = Eigen::VectorXd::Random(30);
  DenseMatrix sigma = S * st.K * S.transpose();
  sigma.diagonal() += (0.7 * V).array().matrix() + Eigen::VectorXd::Constant(30, 0.2);
  const double want = -0.5 * (30 * std::log(2 * std::numbers::pi) +
                              std::log(sigma.fullPivLu().determinant()) +
                              r.dot(sigma.fullPivLu().solve(r)));
  EXPECT_NEAR(frk_loglik(S, V, 0.7, r, st), want, 1e-8);
}

TEST(FrkEm, LogLikelihoodNonDecreasing) {
  const auto basis = BisquareBasis::multiresolution({-100, 30, -80, 50}, {{3, 3}, {6, 6}}, 1.5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimulationConfig c;
    c.n_points = 150;
    c.seed = seed;
    const auto fit = em_fit_frk(simulate(c), TrendSpec(), basis, c.sigma_eps_sq);
    const auto& t = fit.diagnostics.trace;
    ASSERT_GE(t.size(), 2u);
    for (std::size_t i = 1; i < t.size(); ++i)
      EXPECT_GE(t[i], t[i - 1] - 1e-10 * std::max(1.0, std::abs(t[i - 1]))) << "seed " << seed;
    EXPECT_EQ(fit.params.beta.size(), 2);
  }
}

TEST(FrkEm, RecoversKFromReplicateFields) {
  const int n = 200, T = 200;
  const auto basis = BisquareBasis::multiresolution({0, 0, 10, 10}, {{3, 3}}, 1.5);
  std::vector<double> errors;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const auto locs = testing::random_locations(n, rng);
    const DenseMatrix S = build_basis_matrix(basis, locs);
    const DenseMatrix K = testing::random_spd(9, rng);
    const Eigen::LLT<DenseMatrix> kl(K);
    const double xi = 0.3, eps = 0.2;
    DenseMatrix R(n, T);
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd e(9);
      for (auto& v : e) v = g(rng);
      const Eigen::VectorXd eta = kl.matrixL() * e;
      for (int i = 0; i < n; ++i)
        R(i, t) = S.row(i).dot(eta) + std::sqrt(xi) * g(rng) + std::sqrt(eps) * g(rng);
    }
    const auto fit = em_fit_frk_fields(S, Eigen::VectorXd::Ones(n), eps, R);
    errors.push_back((fit.params.K - K).norm() / K.norm());
  }
  std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
  EXPECT_LT(errors[10], 0.30);
}

}  // namespace
}  // namespace spb
