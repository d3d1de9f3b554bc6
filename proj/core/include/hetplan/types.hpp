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
#ifndef HETPLAN_TYPES_HPP_
#define HETPLAN_TYPES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hetplan {

// Transformer architecture plus the precision/activation constants the cost
// model needs. All sizes are per full (unsharded) model.
struct ModelSpec {
  int num_layers = 0;       // transformer layers (embedding/lm-head folded in, see edge multiplier)
  long long hidden_size = 0;  // H
  long long seq_length = 0;   // L, tokens per sequence
  long long vocab_size = 0;
  int num_heads = 0;
  int bytes_per_element = 2;  // training precision: 2 (fp16/bf16) or 4 (fp32)
  // Activation footprint per token per hidden unit, bytes. Common dense
  // transformer estimate; overridable per deployment.
  double activation_bytes_per_token_per_hidden = 34.0;
  // Extra compute charged to the first and last pipeline stages, as a
  // multiple of one transformer layer's cost (embedding / LM head). The
  // published experiments split plain layer counts, so this defaults to 0.
  double edge_layer_cost_multiplier = 0.0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// One accelerator type in the cluster.
struct DeviceGroup {
  std::string name;
  double peak_tflops = 0.0;    // peak at training precision
  double memory_bytes = 0.0;   // per accelerator
  int node_count = 0;
  int devices_per_node = 0;
  // Fraction of peak the analytic model credits this group with; 1.0 until
  // profile calibration overwrites it (may exceed 1.0 up to 1.5 after
  // calibration when the configured peak is conservative).
  double compute_efficiency = 1.0;
  // Backward time as a multiple of forward time; calibration overwrites.
  double bwd_fwd_ratio = 2.0;

  friend bool operator==(const DeviceGroup&, const DeviceGroup&) = default;
};

enum class ScopeKind { IntraNode, InterNodeHomogeneous, InterGroup };

// Which device pairs a link connects: within a node, between nodes of one
// group, or between two groups.
struct LinkScope {
  ScopeKind kind = ScopeKind::IntraNode;
  std::string group_a;  // owning group (intra/inter-node) or first group
  std::string group_b;  // second group, inter-group only

  friend bool operator==(const LinkScope&, const LinkScope&) = default;
};

enum class PathKind { GpuDirect, CpuStaged };

struct Link {
  LinkScope endpoints;
  double bandwidth_bits_per_s = 0.0;
  double latency_s = 0.0;
  double efficiency = 1.0;  // achievable fraction of nominal bandwidth
  PathKind path_kind = PathKind::GpuDirect;
  // Device<->host copy bandwidth, bytes/s; required for cpu-staged paths
  // (one copy each way around the wire transfer).
  double staging_copy_bytes_per_s = 0.0;

  friend bool operator==(const Link&, const Link&) = default;
};

struct ClusterSpec {
  std::vector<DeviceGroup> groups;
  std::vector<Link> links;

  const DeviceGroup* find_group(const std::string& name) const;
  const Link* intra_node_link(const std::string& group) const;
  const Link* inter_node_link(const std::string& group) const;
  // Order-insensitive lookup; nullptr when the pair is not connected.
  const Link* inter_group_link(const std::string& a, const std::string& b) const;
  int total_nodes() const;
  long long total_devices() const;

  friend bool operator==(const ClusterSpec&, const ClusterSpec&) = default;
};

struct TrainConfig {
  long long global_batch_size = 0;  // G, sequences per iteration
  long long micro_batch_size = 0;   // B, sequences per micro-batch
  // Bytes of gradient + optimizer state per weight byte (fp16 weights+grads,
  // fp32 master + two moments => 16 B/param = 8x the 2-byte weight).
  double optimizer_state_multiplier = 8.0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Half-open [begin, end) range of layer indices.
struct LayerRange {
  int begin = 0;
  int end = 0;
  int count() const { return end - begin; }

  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

struct StageAssignment {
  LayerRange layer_range;
  std::string group;  // DeviceGroup name
  int nodes_used = 0;
  int tp_degree = 1;  // intra-node tensor parallelism
  int dp_degree = 1;  // shared across all stages of a plan

  friend bool operator==(const StageAssignment&, const StageAssignment&) = default;
};

enum class Schedule { GPipe, OneFOneB };

struct ParallelPlan {
  std::vector<StageAssignment> stages;
  long long micro_batches_per_dp_replica = 1;  // M
  // Micro-batch size the plan was built for; 0 means "use TrainConfig's".
  long long micro_batch_size = 0;
  Schedule schedule = Schedule::OneFOneB;
  // Digests of the input documents the plan was derived from (provenance;
  // cmd_compare refuses plans whose model digests disagree).
  std::map<std::string, std::string> input_digests;

  int stage_count() const { return static_cast<int>(stages.size()); }
  int dp_degree() const { return stages.empty() ? 1 : stages.front().dp_degree; }
  long long effective_micro_batch_size(const TrainConfig& cfg) const {
    return micro_batch_size > 0 ? micro_batch_size : cfg.micro_batch_size;
  }
  long long total_devices() const;

  friend bool operator==(const ParallelPlan&, const ParallelPlan&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Structural validation of the specs themselves; throws ConfigError with the
// first violated invariant. Used at document parse time.
void validate_spec(const ModelSpec& model);
void validate_spec(const ClusterSpec& cluster);
void validate_spec(const TrainConfig& cfg);

// Checks every plan invariant against the given model/cluster/config and
// returns the full list of violations. Pure; never throws on bad plans.
ValidationReport validate_plan(const ParallelPlan& plan, const ModelSpec& model,
                               const ClusterSpec& cluster, const TrainConfig& cfg);

const char* to_string(Schedule s);
const char* to_string(PathKind k);
const char* to_string(ScopeKind k);

}  // namespace hetplan

#endif  // HETPLAN_TYPES_HPP_
