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

#include "hetplan/planner.hpp"

using namespace hetplan;

namespace {

ClusterSpec bench_cluster(int fast_nodes, int slow_nodes) {
  ClusterSpec c;
  DeviceGroup fast;
  fast.name = "fast";
  fast.peak_tflops = 200.0;
  fast.memory_bytes = 1e18;
  fast.node_count = fast_nodes;
  fast.devices_per_node = 1;
  DeviceGroup slow = fast;
  slow.name = "slow";
  slow.peak_tflops = 100.0;
  slow.node_count = slow_nodes;
  c.groups = {fast, slow};
  auto link = [](ScopeKind kind, const char* a, const char* b) {
    Link l;
    l.endpoints = {kind, a, b};
    l.bandwidth_bits_per_s = 1e12;
    return l;
  };
  c.links = {link(ScopeKind::IntraNode, "fast", ""),
             link(ScopeKind::InterNodeHomogeneous, "fast", ""),
             link(ScopeKind::IntraNode, "slow", ""),
             link(ScopeKind::InterNodeHomogeneous, "slow", ""),
             link(ScopeKind::InterGroup, "fast", "slow")};
  return c;
}

ModelSpec bench_model(int layers) {
  ModelSpec m;
  m.num_layers = layers;
  m.hidden_size = 4096;
  m.seq_length = 2048;
  m.vocab_size = 32000;
  m.num_heads = 32;
  m.bytes_per_element = 2;
  return m;
}

}  // namespace

static void BM_split_layers(benchmark::State& state) {
  const int stages = static_cast<int>(state.range(0));
  std::vector<double> weights(stages);
  for (int i = 0; i < stages; ++i) weights[i] = 1.0 + 0.1 * (i % 7);
  for (auto _ : state) {
    auto counts = split_layers(160, weights);
    benchmark::DoNotOptimize(counts.data());
  }
}
BENCHMARK(BM_split_layers)->Arg(4)->Arg(12)->Arg(24);

static void BM_search_two_groups(benchmark::State& state) {
  const int pp = static_cast<int>(state.range(0));
  ModelSpec model = bench_model(8 * pp);
  ClusterSpec cluster = bench_cluster(pp / 2, pp - pp / 2);
  TrainConfig cfg;
  cfg.global_batch_size = 16;
  cfg.micro_batch_size = 1;
  PlannerConfig pcfg;
  pcfg.pipeline_degrees = {pp};
  pcfg.memory_headroom = 1.0;
  for (auto _ : state) {
    SearchOutcome out = search(model, cluster, cfg, pcfg);
    benchmark::DoNotOptimize(out.eval.sim.iteration_time_s);
  }
  state.SetLabel("candidates=" + std::to_string(search(model, cluster, cfg, pcfg)
                                                    .candidates_simulated));
}
BENCHMARK(BM_search_two_groups)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
