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

#include "spb/basis.hpp"
#include "spb/error.hpp"
#include "test_support.hpp"

namespace spb {
namespace {

TEST(Bisquare, CentreBoundaryAndBeyond) {
  const BisquareBasis b({{0.0, 0.0}, {3.0, 0.0}}, {2.0, 1.0});
  EXPECT_DOUBLE_EQ(eval_basis(b, {0.0, 0.0})[0], 1.0);
  EXPECT_DOUBLE_EQ(eval_basis(b, {2.0, 0.0})[0], 0.0);
  EXPECT_DOUBLE_EQ(eval_basis(b, {2.5, 0.0})[0], 0.0);
  const double t = 1.0 / 2.0;
  EXPECT_DOUBLE_EQ(eval_basis(b, {0.0, 1.0})[0], (1 - t * t) * (1 - t * t));
}

TEST(Bisquare, MatrixRowMatchesScalarEvaluations) {
  const BisquareBasis b({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {1.5, 1.5, 1.5});
  const Location u{0.4, 0.3};
  const DenseMatrix m = build_basis_matrix(b, std::span<const Location>(&u, 1));
  ASSERT_EQ(m.rows(), 1);
  ASSERT_EQ(m.cols(), 3);
  for (int k = 0; k < 3; ++k) {
    const double t = distance(u, b.centers()[k]) / 1.5;
    EXPECT_NEAR(m(0, k), (1 - t * t) * (1 - t * t), 1e-15);
  }
}

TEST(Bisquare, MultiresolutionSizes) {
  const auto b = BisquareBasis::multiresolution({0, 0, 12, 8}, {{6, 4}, {12, 6}}, 1.5);
  EXPECT_EQ(b.size(), 96);
  EXPECT_DOUBLE_EQ(b.widths().front(), 1.5 * 2.0);
  EXPECT_DOUBLE_EQ(b.centers().front().lon, 1.0);
}

TEST(PredictiveProcess, KnotGivesUnitVector) {
  std::mt19937_64 rng(1);
  const auto knots = testing::random_locations(5, rng);
  const PredictiveProcessBasis b(knots, {1.0, 2.0});
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd s = eval_basis(b, knots[i]);
    // Dense oracle: k(u)' K^{-1} with an explicit inverse.
    const DenseMatrix kinv = b.knot_cov().inverse();
    const Eigen::VectorXd want = kinv * b.cross_cov(knots[i]);
    EXPECT_LT((s - want).norm(), 1e-10);
    EXPECT_NEAR(s[i], 1.0, 1e-10);
    EXPECT_NEAR(s.norm(), 1.0, 1e-10);
  }
}

TEST(Wendland, ProfileEndpoints) {
  EXPECT_DOUBLE_EQ(WendlandBasis::profile(0.0), 1.0);
  EXPECT_DOUBLE_EQ(WendlandBasis::profile(1.0), 0.0);
  const double d = 0.4;
  EXPECT_NEAR(WendlandBasis::profile(d), std::pow(0.6, 6) * (35 * 0.16 + 18 * 0.4 + 3) / 3, 1e-15);
}

TEST(Wendland, SparseEvaluationMatchesBruteForce) {
  const RegularGrid g{0.0, 0.0, 0.5, 21, 17};
  const WendlandBasis b(g, 2.5 * 0.5);
  std::mt19937_64 rng(4);
  for (const auto& u : testing::random_locations(50, rng, {-1.0, -1.0, 11.0, 9.0})) {
    const Eigen::VectorXd s = eval_basis(b, u);
    int expected_nonzero = 0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double d = distance(u, g.node(k)) / b.radius();
      const double want = d < 1.0 ? WendlandBasis::profile(d) : 0.0;
      expected_nonzero += want > 0.0 ? 1 : 0;
      EXPECT_NEAR(s[k], want, 1e-15);
    }
    EXPECT_EQ((s.array() > 0.0).count(), expected_nonzero);
  }
}

TEST(PiecewiseLinear, PartitionOfUnityAndNodalInterpolation) {
  const PiecewiseLinearBasis b({0.0, 0.0, 1.0, 6, 5});
  std::mt19937_64 rng(6);
  for (const auto& u : testing::random_locations(40, rng, {0.0, 0.0, 5.0, 4.0})) {
    const Eigen::VectorXd s = eval_basis(b, u);
    EXPECT_NEAR(s.sum(), 1.0, 1e-14);
    EXPECT_GE(s.minCoeff(), 0.0);
    // Linear functions are reproduced exactly.
    double lon = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) lon += s[k] * b.grid().node(k).lon;
    EXPECT_NEAR(lon, u.lon, 1e-12);
  }
  const Eigen::VectorXd at_node = eval_basis(b, b.grid().node(2, 3));
  EXPECT_NEAR(at_node[b.grid().index(2, 3)], 1.0, 1e-14);
  EXPECT_THROW(eval_basis(b, {5.5, 1.0}), DataError);
}

TEST(PiecewiseLinear, StiffnessAndMassStencil) {
  const PiecewiseLinearBasis b({0.0, 0.0, 1.0, 5, 5});
  const DenseMatrix g(b.stiffness());
  const auto c = b.grid().index(2, 2);
  EXPECT_NEAR(g(c, c), 4.0, 1e-14);
  EXPECT_NEAR(g(c, b.grid().index(3, 2)), -1.0, 1e-14);
  EXPECT_NEAR(g(c, b.grid().index(2, 3)), -1.0, 1e-14);
  EXPECT_NEAR(g(c, b.grid().index(3, 3)), 0.0, 1e-14);
  EXPECT_NEAR(g.rowwise().sum().cwiseAbs().maxCoeff(), 0.0, 1e-13);
  const Eigen::VectorXd m = b.lumped_mass();
  EXPECT_NEAR(m[c], 1.0, 1e-14);
  EXPECT_NEAR(m.sum(), 16.0, 1e-12);
}

TEST(BasisJson, RoundTrips) {
  const auto bis = BisquareBasis::multiresolution({0, 0, 4, 4}, {{2, 2}}, 1.5);
  const WendlandBasis wen({0.0, 0.0, 1.0, 4, 4}, 2.5);
  const PiecewiseLinearBasis pl({0.0, 0.0, 1.0, 4, 4});
  const Location u{1.3, 2.2};
  for (const Basis* b : std::initializer_list<const Basis*>{&bis, &wen, &pl}) {
    const auto back = basis_from_json(b->to_json());
    EXPECT_EQ(back->kind(), b->kind());
    EXPECT_LT((eval_basis(*back, u) - eval_basis(*b, u)).norm(), 1e-15);
  }
}

TEST(RegularGrid, CoveringContainsBox) {
  const BoundingBox box{-3.2, 1.1, 4.7, 6.0};
  const RegularGrid g = RegularGrid::covering(box, 0.5, 2);
  const BoundingBox h = g.hull();
  EXPECT_LE(h.lon_min, box.lon_min - 1.0 + 1e-12);
  EXPECT_GE(h.lon_max, box.lon_max + 1.0 - 1e-12);
  EXPECT_LE(h.lat_min, box.lat_min - 1.0 + 1e-12);
  EXPECT_GE(h.lat_max, box.lat_max + 1.0 - 1e-12);
  const RegularGrid t = RegularGrid::with_target_size(box, 400, 0);
  EXPECT_NEAR(static_cast<double>(t.size()), 400.0, 120.0);
}

}  // namespace
}  // namespace spb
