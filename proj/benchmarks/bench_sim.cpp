/* Copyright 2026 The hetplan Authors
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
 */
#include <benchmark/benchmark.h>

#include "hetplan/sim.hpp"

using namespace hetplan;

static void BM_simulate_1f1b(benchmark::State& state) {
  const int P = static_cast<int>(state.range(0));
  const int M = static_cast<int>(state.range(1));
  std::vector<StageTimes> times(P);
  for (int i = 0; i < P; ++i) {
    times[i].fwd_s = 1.0 + 0.01 * i;
    times[i].bwd_s = 2.0 + 0.02 * i;
    times[i].send_fwd_s = 0.05;
    times[i].send_bwd_s = 0.05;
  }
  for (auto _ : state) {
    SimResult r = simulate(Schedule::OneFOneB, times, M);
    benchmark::DoNotOptimize(r.iteration_time_s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(P) * M * 2);
}
BENCHMARK(BM_simulate_1f1b)
    ->Args({4, 16})
    ->Args({8, 64})
    ->Args({12, 256})
    ->Args({24, 256});

static void BM_simulate_gpipe(benchmark::State& state) {
  const int P = static_cast<int>(state.range(0));
  const int M = static_cast<int>(state.range(1));
  std::vector<StageTimes> times(P);
  for (int i = 0; i < P; ++i) {
    times[i].fwd_s = 1.0;
    times[i].bwd_s = 2.0;
  }
  for (auto _ : state) {
    SimResult r = simulate(Schedule::GPipe, times, M);
    benchmark::DoNotOptimize(r.iteration_time_s);
  }
}
BENCHMARK(BM_simulate_gpipe)->Args({8, 64})->Args({12, 256});
