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
#include "spb/error.hpp"
#include "spb/estimation.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

double dense_loglik(const DenseMatrix& sigma, const Eigen::VectorXd& r) {
  const auto lu = sigma.fullPivLu();
  return -0.5 * (r.size() * std::log(2 * std::numbers::pi) + std::log(lu.determinant()) +
                 r.dot(lu.solve(r)));
}

DenseMatrix dense_sar(int nx, int ny, double kappa) {
  DenseMatrix b = DenseMatrix::Zero(nx * ny, nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      b(k, k) = 4.0 + kappa * kappa;
      if (i > 0) b(k, k - 1) = -1.0;
      if (i + 1 < nx) b(k, k + 1) = -1.0;
      if (j > 0) b(k, k - nx) = -1.0;
      if (j + 1 < ny) b(k, k + nx) = -1.0;
    }
  }
  return b;
}

TEST(SarMatrix, CovarianceMatchesDenseInverse) {
  const RegularGrid g{0.0, 0.0, 1.0, 4, 4};
  const double kappa = 0.7, s2 = 1.8;
  const DenseMatrix b(sar_matrix(g, kappa));
  const DenseMatrix want_b = dense_sar(4, 4, kappa);
  EXPECT_LT((b - want_b).norm(), 1e-15);
  // K = s2 (B'B)^{-1}, via the sparse precision and via a dense inverse.
  const SparseMatrix q = SparseMatrix(sar_matrix(g, kappa).transpose() * sar_matrix(g, kappa)) / s2;
  const DenseMatrix k_sparse = SparseCholesky(q).solve(DenseMatrix(DenseMatrix::Identity(16, 16)));
  const DenseMatrix k_dense = s2 * (want_b.transpose() * want_b).inverse();
  EXPECT_LT((k_sparse - k_dense).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SpdePrecision, InteriorRowIsThirteenPointStencil) {
  const PiecewiseLinearBasis mesh({0.0, 0.0, 1.0, 9, 9});
  const double kappa = 0.8, s2 = 2.5;
  const DenseMatrix q(spde_precision(mesh, kappa, s2));
  const auto& g = mesh.grid();
  const double k2 = kappa * kappa;
  auto row = [&](int di, int dj) { return q(g.index(4, 4), g.index(4 + di, 4 + dj)); };
  EXPECT_NEAR(row(0, 0), ((4 + k2) * (4 + k2) + 4) / s2, 1e-12);
  for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
    EXPECT_NEAR(row(di, dj), -2 * (4 + k2) / s2, 1e-12);
  for (auto [di, dj] : {std::pair{1, 1}, {-1, -1}, {1, -1}, {-1, 1}})
    EXPECT_NEAR(row(di, dj), 2.0 / s2, 1e-12);
  for (auto [di, dj] : {std::pair{2, 0}, {-2, 0}, {0, 2}, {0, -2}})
    EXPECT_NEAR(row(di, dj), 1.0 / s2, 1e-12);
  int nonzero = 0;
  for (Eigen::Index k = 0; k < q.cols(); ++k) nonzero += q(g.index(4, 4), k) != 0.0 ? 1 : 0;
  EXPECT_EQ(nonzero, 13);
}

struct GmrfCase {
  SparseMatrix S;
  SparseMatrix Q;
  Eigen::VectorXd r;
  double noise = 0.3;
};

GmrfCase make_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const WendlandBasis basis({0.0, 0.0, 2.0, 6, 6}, 5.0);
  const auto locs = testing::random_locations(40, rng);
  GmrfCase c;
  c.S = build_sparse_basis_matrix(basis, locs);
  const SparseMatrix b = sar_matrix(basis.grid(), 0.6);
  c.Q = SparseMatrix(b.transpose() * b) / 1.5;
  c.r = Eigen::VectorXd::Random(40);
  return c;
}

TEST(GmrfModel, LikelihoodAndPosteriorMatchDense) {
  const auto c = make_case(1);
  const GmrfModel m(c.S, c.Q, c.noise);
  const DenseMatrix S(c.S);
  const DenseMatrix K = DenseMatrix(c.Q).inverse();
  DenseMatrix sigma = S * K * S.transpose();
  sigma.diagonal().array() += c.noise;
  EXPECT_NEAR(m.log_likelihood(c.r), dense_loglik(sigma, c.r), 1e-8);
  EXPECT_NEAR(m.quad_form(c.r), c.r.dot(sigma.inverse() * c.r), 1e-8);

  const DenseMatrix sinv = sigma.inverse();
  const Eigen::VectorXd mean = K * S.transpose() * sinv * c.r;
  EXPECT_LT((m.posterior_mean(c.r) - mean).norm(), 1e-8 * std::max(1.0, mean.norm()));
  const DenseMatrix post = K - K * S.transpose() * sinv * S * K;
  const Eigen::VectorXd pv = m.posterior_variances(c.S);
  const Eigen::VectorXd prv = m.prior_variances(c.S);
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    EXPECT_NEAR(pv[i], S.row(i).dot(post * S.row(i).transpose()), 1e-8);
    EXPECT_NEAR(prv[i], S.row(i).dot(K * S.row(i).transpose()), 1e-8);
    EXPECT_LE(pv[i], prv[i] + 1e-12);
  }
}

TEST(LtkLoglik, MatchesDense) {
  std::mt19937_64 rng(2);
  const WendlandBasis basis({0.0, 0.0, 2.5, 5, 5}, 6.0);
  const auto locs = testing::random_locations(30, rng);
  const Eigen::VectorXd r = Eigen::VectorXd::Random(30);
  const DenseMatrix S = build_basis_matrix(basis, locs);
  const DenseMatrix b = dense_sar(5, 5, 0.9);
  DenseMatrix sigma = S * (2.0 * (b.transpose() * b).inverse()) * S.transpose();
  sigma.diagonal().array() += 0.4;
  EXPECT_NEAR(ltk_loglik(build_sparse_basis_matrix(basis, locs), basis.grid(), r, 2.0, 0.9, 0.4),
              dense_loglik(sigma, r), 1e-8);
}

TEST(SpdLoglik, MatchesDense) {
  std::mt19937_64 rng(3);
  const PiecewiseLinearBasis mesh({-1.0, -1.0, 1.0, 13, 13});
  const auto locs = testing::random_locations(30, rng);
  const Eigen::VectorXd r = Eigen::VectorXd::Random(30);
  const DenseMatrix S = build_basis_matrix(mesh, locs);
  const DenseMatrix K = DenseMatrix(spde_precision(mesh, 0.7, 3.0)).inverse();
  DenseMatrix sigma = S * K * S.transpose();
  sigma.diagonal().array() += 0.2;
  EXPECT_NEAR(spd_loglik(build_sparse_basis_matrix(mesh, locs), mesh, r, 0.7, 3.0, 0.2),
              dense_loglik(sigma, r), 1e-8);
}

// Draws eta ~ N(0, Q^{-1}) and returns S eta + noise at random locations.
SpatialDataset simulate_gmrf(const Basis& basis, const SparseMatrix& Q, double noise,
                             std::size_t n, const BoundingBox& box, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto locs = testing::random_locations(n, rng, box);
  const Eigen::LLT<DenseMatrix> llt{DenseMatrix(Q)};
  Eigen::VectorXd e(Q.rows());
  for (auto& v : e) v = g(rng);
  const Eigen::VectorXd eta = llt.matrixU().solve(e);
  const DenseMatrix S = build_basis_matrix(basis, locs);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = 10.0 + S.row(static_cast<Eigen::Index>(i)).dot(eta) + std::sqrt(noise) * g(rng);
  return SpatialDataset(locs, z);
}

TEST(MlFitLtk, AscentAndKappaRecovery) {
  const RegularGrid grid = RegularGrid::covering({0, 0, 10, 10}, 1.0, 2);
  const WendlandBasis basis(grid, 2.5);
  const double kappa = 0.5, s_eta = 1.0, eps = 0.1;
  const SparseMatrix b = sar_matrix(grid, kappa);
  const SparseMatrix q = SparseMatrix(b.transpose() * b) / s_eta;
  std::vector<double> est;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto d = simulate_gmrf(basis, q, eps, 300, {0, 0, 10, 10}, rng);
    const auto fit = ml_fit_ltk(d, TrendSpec::intercept_only(), basis, eps);
    EXPECT_GE(fit.diagnostics.final_objective, fit.diagnostics.initial_objective);
    est.push_back(fit.params.kappa);
  }
  std::nth_element(est.begin(), est.begin() + 10, est.end());
  EXPECT_GT(est[10], kappa / 3.0);
  EXPECT_LT(est[10], kappa * 3.0);
}

TEST(EbFitSpd, AscentAndKappaRecovery) {
  const PiecewiseLinearBasis mesh({-1.0, -1.0, 0.5, 25, 25});
  const double kappa = 1.0, s_nu = 4.0 * std::numbers::pi, eps = 0.1;
  const SparseMatrix q = spde_precision(mesh, kappa, s_nu);
  std::vector<double> est;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const auto d = simulate_gmrf(mesh, q, eps, 300, {0, 0, 10, 10}, rng);
    const auto fit = eb_fit_spd(d, TrendSpec::intercept_only(), mesh);
    EXPECT_GE(fit.diagnostics.final_objective, fit.diagnostics.initial_objective);
    EXPECT_GT(fit.params.sigma_eps_sq, 0.0);
    est.push_back(fit.params.kappa);
  }
  std::nth_element(est.begin(), est.begin() + 10, est.end());
  EXPECT_GT(est[10], kappa / 3.0);
  EXPECT_LT(est[10], kappa * 3.0);
}

TEST(EbFitSpd, RejectsDataOutsideMesh) {
  const PiecewiseLinearBasis mesh({0.0, 0.0, 1.0, 3, 3});
  const SpatialDataset d({{0.5, 0.5}, {1.0, 1.0}, {5.0, 5.0}}, {1.0, 2.0, 3.0});
  EXPECT_THROW(eb_fit_spd(d, TrendSpec::intercept_only(), mesh), DataError);
}

TEST(MlFitLtk, RequiresPositiveNoise) {
  const WendlandBasis basis({0.0, 0.0, 1.0, 4, 4}, 2.5);
  EXPECT_THROW(ml_fit_ltk(testing::random_dataset(10, 1, {0, 0, 3, 3}), TrendSpec(), basis, 0.0),
               ConfigError);
}

}  // namespace
}  // namespace spb
