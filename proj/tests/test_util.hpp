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
#ifndef HETPLAN_TESTS_TEST_UTIL_HPP_
#define HETPLAN_TESTS_TEST_UTIL_HPP_

#include <string>
#include <vector>

#include "hetplan/evaluate.hpp"
#include "hetplan/types.hpp"

namespace hetplan::testutil {

inline Link make_link(ScopeKind kind, const std::string& a, const std::string& b,
                      double bandwidth_bits, double efficiency = 1.0, double latency = 0.0,
                      PathKind path = PathKind::GpuDirect, double staging = 0.0) {
  Link l;
  l.endpoints.kind = kind;
  l.endpoints.group_a = a;
  l.endpoints.group_b = b;
  l.bandwidth_bits_per_s = bandwidth_bits;
  l.efficiency = efficiency;
  l.latency_s = latency;
  l.path_kind = path;
  l.staging_copy_bytes_per_s = staging;
  return l;
}

inline ModelSpec tiny_model(int layers, long long hidden = 128, long long seq = 64) {
  ModelSpec m;
  m.num_layers = layers;
  m.hidden_size = hidden;
  m.seq_length = seq;
  m.vocab_size = 1000;
  m.num_heads = 8;
  m.bytes_per_element = 2;
  return m;
}

// Two single-device-per-node groups, "fast" `ratio`x quicker than "slow",
// connected by an inter-group link. Memory is effectively unbounded so only
// time drives planning.
inline ClusterSpec two_group_cluster(int fast_nodes, int slow_nodes, double ratio,
                                     double inter_group_bandwidth_bits = 1e15) {
  ClusterSpec c;
  DeviceGroup fast;
  fast.name = "fast";
  fast.peak_tflops = 100.0 * ratio;
  fast.memory_bytes = 1e18;
  fast.node_count = fast_nodes;
  fast.devices_per_node = 1;
  DeviceGroup slow = fast;
  slow.name = "slow";
  slow.peak_tflops = 100.0;
  slow.node_count = slow_nodes;
  c.groups = {fast, slow};
  c.links = {
      make_link(ScopeKind::IntraNode, "fast", "", 1e15),
      make_link(ScopeKind::InterNodeHomogeneous, "fast", "", 1e15),
      make_link(ScopeKind::IntraNode, "slow", "", 1e15),
      make_link(ScopeKind::InterNodeHomogeneous, "slow", "", 1e15),
      make_link(ScopeKind::InterGroup, "fast", "slow", inter_group_bandwidth_bits),
  };
  return c;
}

inline ClusterSpec one_group_cluster(int nodes, int devices_per_node = 1,
                                     double peak_tflops = 100.0, double memory = 1e18) {
  ClusterSpec c;
  DeviceGroup g;
  g.name = "gpu";
  g.peak_tflops = peak_tflops;
  g.memory_bytes = memory;
  g.node_count = nodes;
  g.devices_per_node = devices_per_node;
  c.groups = {g};
  c.links = {
      make_link(ScopeKind::IntraNode, "gpu", "", 1e15),
      make_link(ScopeKind::InterNodeHomogeneous, "gpu", "", 1e15),
  };
  return c;
}

inline TrainConfig train_config(long long global_batch, long long micro_batch = 1) {
  TrainConfig t;
  t.global_batch_size = global_batch;
  t.micro_batch_size = micro_batch;
  return t;
}

// A plan over single-node stages (dp=1, tp=1, one node each), layers split
// per `counts`, stage i running on group `stage_groups[i]`.
inline ParallelPlan single_node_plan(const std::vector<int>& counts,
                                     const std::vector<std::string>& stage_groups,
                                     long long micro_batches,
                                     Schedule schedule = Schedule::OneFOneB) {
  ParallelPlan plan;
  plan.schedule = schedule;
  plan.micro_batches_per_dp_replica = micro_batches;
  plan.micro_batch_size = 1;
  int begin = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    StageAssignment s;
    s.layer_range = {begin, begin + counts[i]};
    begin += counts[i];
    s.group = stage_groups[i];
    s.nodes_used = 1;
    s.tp_degree = 1;
    s.dp_degree = 1;
    plan.stages.push_back(s);
  }
  return plan;
}

inline std::vector<StageTimes> uniform_times(int stages, double f, double b, double comm = 0.0) {
  std::vector<StageTimes> t(stages);
  for (auto& st : t) {
    st.fwd_s = f;
    st.bwd_s = b;
    st.send_fwd_s = comm;
    st.send_bwd_s = comm;
  }
  return t;
}

}  // namespace hetplan::testutil

#endif  // HETPLAN_TESTS_TEST_UTIL_HPP_
