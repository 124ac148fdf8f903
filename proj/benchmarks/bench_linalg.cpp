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


#include <random>

#include <benchmark/benchmark.h>

#include "spb/basis.hpp"
#include "spb/estimation.hpp"
#include "spb/linalg.hpp"
#include "test_support.hpp"

namespace {

spb::LowRankPlusDiag instance(Eigen::Index n, Eigen::Index r) {
  std::mt19937_64 rng(1);
  spb::LowRankPlusDiag m;
  m.S = Eigen::MatrixXd::Random(n, r);
  m.K = spb::testing::random_spd(r, rng);
  m.d = Eigen::VectorXd::Constant(n, 1.5);
  return m;
}

void BM_SmwSolve(benchmark::State& state) {
  const auto m = instance(state.range(0), state.range(1));
  const Eigen::VectorXd b = Eigen::VectorXd::Random(m.n());
  for (auto _ : state) {
    const spb::SmwSolver s(m);
    benchmark::DoNotOptimize(s.solve(b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmwSolve)->Args({1000, 50})->Args({4000, 50})->Args({16000, 50})->Args({4000, 150});

void BM_DenseSolve(benchmark::State& state) {
  const auto m = instance(state.range(0), 50);
  const Eigen::MatrixXd dense = m.dense();
  const Eigen::VectorXd b = Eigen::VectorXd::Random(m.n());
  for (auto _ : state) benchmark::DoNotOptimize(spb::CholeskyFactor(dense).solve(b));
}
BENCHMARK(BM_DenseSolve)->Arg(500)->Arg(1000)->Arg(2000);

void BM_SparseCholesky(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const spb::RegularGrid g{0.0, 0.0, 1.0, side, side};
  const spb::SparseMatrix b = spb::sar_matrix(g, 0.5);
  const spb::SparseMatrix q = b.transpose() * b;
  const Eigen::VectorXd rhs = Eigen::VectorXd::Random(q.rows());
  for (auto _ : state) benchmark::DoNotOptimize(spb::SparseCholesky(q).solve(rhs));
}
BENCHMARK(BM_SparseCholesky)->Arg(32)->Arg(64)->Arg(128);

void BM_SpdePrecision(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const spb::PiecewiseLinearBasis mesh({0.0, 0.0, 1.0, side, side});
  for (auto _ : state) benchmark::DoNotOptimize(spb::spde_precision(mesh, 0.8, 1.0));
}
BENCHMARK(BM_SpdePrecision)->Arg(32)->Arg(128);

}  // namespace
