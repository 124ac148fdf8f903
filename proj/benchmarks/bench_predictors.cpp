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


#include <benchmark/benchmark.h>

#include "spb/predictors.hpp"
#include "spb/simulate.hpp"
#include "test_support.hpp"

namespace {

spb::HoldoutSplit split_of(std::size_t n) {
  spb::SimulationConfig c;
  c.n_points = n;
  c.seed = 3;
  return spb::split_holdout(spb::simulate(c), 0.2, 3);
}

void fit_and_predict(benchmark::State& state, spb::Method m) {
  const auto split = split_of(static_cast<std::size_t>(state.range(0)));
  spb::FitConfig cfg;
  cfg.mpp.chain.chain_length = 200;
  cfg.mpp.chain.burn_in = 100;
  for (auto _ : state) {
    const auto f = spb::fit(m, split.train, cfg);
    benchmark::DoNotOptimize(f->predict(split.validation.locations()));
  }
}

void BM_Tsk(benchmark::State& s) { fit_and_predict(s, spb::Method::TSK); }
void BM_Ssp(benchmark::State& s) { fit_and_predict(s, spb::Method::SSP); }
void BM_Edw(benchmark::State& s) { fit_and_predict(s, spb::Method::EDW); }
void BM_Frk(benchmark::State& s) { fit_and_predict(s, spb::Method::FRK); }
void BM_Mpp(benchmark::State& s) { fit_and_predict(s, spb::Method::MPP); }
void BM_Spd(benchmark::State& s) { fit_and_predict(s, spb::Method::SPD); }
void BM_Ltk(benchmark::State& s) { fit_and_predict(s, spb::Method::LTK); }

BENCHMARK(BM_Tsk)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssp)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Edw)->Arg(300)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Frk)->Arg(300)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mpp)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spd)->Arg(300)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ltk)->Arg(300)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
