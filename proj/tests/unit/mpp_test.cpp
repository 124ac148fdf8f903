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
#include <random>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <gtest/gtest.h>

#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "spb/kernels.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

double empirical_quantile(std::vector<double> v, double p) {
  const auto k = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

std::vector<Location> grid_knots(int nx, int ny, double w, double h) {
  std::vector<Location> k;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) k.push_back({(i + 0.5) * w / nx, (j + 0.5) * h / ny});
  return k;
}

// Standard error of a chain mean by non-overlapping batch means.
double batch_se(const std::vector<double>& x, int batches = 20) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> m(static_cast<std::size_t>(batches), 0.0);
  for (int b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) m[b] += x[b * len + i];
    m[b] /= static_cast<double>(len);
  }
  double mean = 0.0;
  for (double v : m) mean += v / batches;
  double var = 0.0;
  for (double v : m) var += (v - mean) * (v - mean) / (batches - 1);
  return std::sqrt(var / batches);
}

TEST(MppPrior, PriorOnlyQuantilesMatchInverseGamma) {
  MppPriors pr;
  pr.a_eta = 3.0;
  pr.b_eta = 2.0;
  pr.a_eps = 4.0;
  pr.b_eps = 0.5;
  pr.a_kappa = 0.1;
  pr.b_kappa = 2.0;
  MppOptions opt;
  opt.chain_length = 20000;
  opt.burn_in = 500;
  opt.likelihood_enabled = false;
  opt.seed = 3;
  const auto chain = mcmc_fit_mpp(SpatialDataset(), TrendSpec(), grid_knots(2, 2, 4, 4), pr, opt);
  std::vector<double> nu, eps, kap;
  for (const auto& s : chain.samples) {
    nu.push_back(s.params.sigma_nu_sq);
    eps.push_back(s.params.sigma_eps_sq);
    kap.push_back(s.params.kappa);
  }
  const boost::math::inverse_gamma_distribution<double> ig_nu(pr.a_eta, pr.b_eta);
  const boost::math::inverse_gamma_distribution<double> ig_eps(pr.a_eps, pr.b_eps);
  for (double p : {0.1, 0.5, 0.9}) {
    const double qn = boost::math::quantile(ig_nu, p);
    const double qe = boost::math::quantile(ig_eps, p);
    EXPECT_NEAR(empirical_quantile(nu, p) / qn, 1.0, 0.06) << p;
    EXPECT_NEAR(empirical_quantile(eps, p) / qe, 1.0, 0.04) << p;
    // kappa ~ U(a, b)
    EXPECT_NEAR(empirical_quantile(kap, p), pr.a_kappa + p * (pr.b_kappa - pr.a_kappa), 0.08) << p;
  }
}

TEST(MppGibbs, FixedHyperparametersBetaMatchesGls) {
  const auto d = testing::random_dataset(50, 7, {0, 0, 6, 6});
  const auto knots = grid_knots(3, 3, 6, 6);
  const double kappa = 0.8, s_nu = 2.0, s_eps = 0.5;
  MppOptions opt;
  opt.chain_length = 4000;
  opt.burn_in = 200;
  opt.seed = 11;
  opt.fixed_kappa = kappa;
  opt.fixed_sigma_nu_sq = s_nu;
  opt.fixed_sigma_eps_sq = s_eps;
  const TrendSpec trend;
  const auto chain = mcmc_fit_mpp(d, trend, knots, MppPriors{}, opt);

  // Marginal covariance of Z with beta integrated out.
  const auto& locs = d.locations();
  const Eigen::Index n = 50, r = 9;
  DenseMatrix R(r, r), P(n, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) R(i, j) = std::exp(-kappa * distance(knots[i], knots[j]));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < r; ++j) P(i, j) = std::exp(-kappa * distance(locs[i], knots[j]));
  const DenseMatrix low = P * R.inverse() * P.transpose();
  DenseMatrix sigma = s_nu * low;
  for (Eigen::Index i = 0; i < n; ++i) sigma(i, i) += s_nu * (1.0 - low(i, i)) + s_eps;
  const DenseMatrix X = trend.design(locs);
  const DenseMatrix si = sigma.inverse();
  const Eigen::VectorXd gls = (X.transpose() * si * X).inverse() * X.transpose() * si * d.value_vector();

  for (Eigen::Index k = 0; k < 2; ++k) {
    std::vector<double> b;
    for (const auto& s : chain.samples) b.push_back(s.params.beta[k]);
    double mean = 0.0;
    for (double v : b) mean += v / static_cast<double>(b.size());
    EXPECT_LT(std::abs(mean - gls[k]), 3.0 * batch_se(b)) << "beta " << k;
  }
}

TEST(MppGibbs, DeterministicGivenSeed) {
  const auto d = testing::random_dataset(30, 2, {0, 0, 4, 4});
  const auto knots = grid_knots(2, 2, 4, 4);
  const auto pr = default_mpp_priors(d.locations(), 4.0, 0.5);
  MppOptions opt;
  opt.chain_length = 150;
  opt.burn_in = 50;
  opt.seed = 5;
  const auto a = mcmc_fit_mpp(d, TrendSpec(), knots, pr, opt);
  const auto b = mcmc_fit_mpp(d, TrendSpec(), knots, pr, opt);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].params.kappa, b.samples[i].params.kappa);
    EXPECT_EQ(a.samples[i].eta, b.samples[i].eta);
  }
  EXPECT_GT(a.kappa_acceptance, 0.0);
  EXPECT_LT(a.kappa_acceptance, 1.0);
}

TEST(MppPriors, DefaultsUseExactDistanceExtremes) {
  std::mt19937_64 rng(4);
  const auto locs = testing::random_locations(200, rng);
  double dmin = 1e300, dmax = 0.0;
  for (std::size_t i = 0; i < locs.size(); ++i)
    for (std::size_t j = i + 1; j < locs.size(); ++j) {
      dmin = std::min(dmin, distance(locs[i], locs[j]));
      dmax = std::max(dmax, distance(locs[i], locs[j]));
    }
  const auto p = default_mpp_priors(locs, 6.0, 2.0);
  EXPECT_NEAR(p.a_kappa, 3.0 / dmax, 1e-12);
  EXPECT_NEAR(p.b_kappa, 3.0 / dmin, 1e-9 * p.b_kappa);
  EXPECT_DOUBLE_EQ(p.a_eta, 2.0);
  EXPECT_DOUBLE_EQ(p.b_eta, 3.0);
  EXPECT_DOUBLE_EQ(p.b_eps, 1.0);
}

TEST(MppPriors, RejectsDegenerateSupport) {
  MppPriors p;
  p.a_kappa = 2.0;
  p.b_kappa = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = MppPriors{};
  p.b_eta = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(SplitRhat, NearOneForIidAndLargeForDrift) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> iid(4000), drift(4000);
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = g(rng);
    drift[i] = g(rng) + (i < 2000 ? 0.0 : 3.0);
  }
  EXPECT_NEAR(split_rhat(iid), 1.0, 0.01);
  EXPECT_GT(split_rhat(drift), 1.5);
}

}  // namespace
}  // namespace spb
