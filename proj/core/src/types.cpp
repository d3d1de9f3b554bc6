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
#include "hetplan/types.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "hetplan/errors.hpp"

namespace hetplan {

const DeviceGroup* ClusterSpec::find_group(const std::string& name) const {
  for (const DeviceGroup& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

const Link* ClusterSpec::intra_node_link(const std::string& group) const {
  for (const Link& l : links) {
    if (l.endpoints.kind == ScopeKind::IntraNode && l.endpoints.group_a == group) return &l;
  }
  return nullptr;
}

const Link* ClusterSpec::inter_node_link(const std::string& group) const {
  for (const Link& l : links) {
    if (l.endpoints.kind == ScopeKind::InterNodeHomogeneous && l.endpoints.group_a == group)
      return &l;
  }
  return nullptr;
}

const Link* ClusterSpec::inter_group_link(const std::string& a, const std::string& b) const {
  for (const Link& l : links) {
    if (l.endpoints.kind != ScopeKind::InterGroup) continue;
    if ((l.endpoints.group_a == a && l.endpoints.group_b == b) ||
        (l.endpoints.group_a == b && l.endpoints.group_b == a))
      return &l;
  }
  return nullptr;
}

int ClusterSpec::total_nodes() const {
  int n = 0;
  for (const DeviceGroup& g : groups) n += g.node_count;
  return n;
}

long long ClusterSpec::total_devices() const {
  long long n = 0;
  for (const DeviceGroup& g : groups)
    n += static_cast<long long>(g.node_count) * g.devices_per_node;
  return n;
}

long long ParallelPlan::total_devices() const {
  long long n = 0;
  for (const StageAssignment& s : stages)
    n += static_cast<long long>(s.dp_degree) * s.tp_degree;
  return n;
}

void validate_spec(const ModelSpec& model) {
  if (model.num_layers < 1) throw ConfigError("model: num_layers must be >= 1");
  if (model.hidden_size < 1) throw ConfigError("model: hidden_size must be >= 1");
  if (model.seq_length < 1) throw ConfigError("model: seq_length must be >= 1");
  if (model.num_heads < 1) throw ConfigError("model: num_heads must be >= 1");
  if (model.hidden_size % model.num_heads != 0)
    throw ConfigError("model: hidden_size must be divisible by num_heads");
  if (model.bytes_per_element != 2 && model.bytes_per_element != 4)
    throw ConfigError("model: bytes_per_element must be 2 or 4");
  if (model.activation_bytes_per_token_per_hidden < 0)
    throw ConfigError("model: activation_bytes_per_token_per_hidden must be >= 0");
  if (model.edge_layer_cost_multiplier < 0)
    throw ConfigError("model: edge_layer_cost_multiplier must be >= 0");
}

void validate_spec(const ClusterSpec& cluster) {
  if (cluster.groups.empty()) throw ConfigError("cluster: at least one device group required");
  std::set<std::string> names;
  for (const DeviceGroup& g : cluster.groups) {
    if (g.name.empty()) throw ConfigError("cluster: group name must be non-empty");
    if (!names.insert(g.name).second)
      throw ConfigError("cluster: duplicate group name '" + g.name + "'");
    if (g.peak_tflops <= 0) throw ConfigError("cluster: group '" + g.name + "': peak_tflops must be > 0");
    if (g.memory_bytes <= 0) throw ConfigError("cluster: group '" + g.name + "': memory_bytes must be > 0");
    if (g.node_count < 1) throw ConfigError("cluster: group '" + g.name + "': node_count must be >= 1");
    if (g.devices_per_node < 1)
      throw ConfigError("cluster: group '" + g.name + "': devices_per_node must be >= 1");
    // Hand-written configs must stay within (0, 1]; calibration alone may
    // push efficiency up to 1.5 when the configured peak is conservative.
    if (g.compute_efficiency <= 0 || g.compute_efficiency > 1.5)
      throw ConfigError("cluster: group '" + g.name + "': compute_efficiency must be in (0, 1.5]");
    if (g.bwd_fwd_ratio < 1.0)
      throw ConfigError("cluster: group '" + g.name + "': bwd_fwd_ratio must be >= 1");
  }

  std::map<std::string, int> intra_count, inter_count;
  std::set<std::pair<std::string, std::string>> group_pairs;
  for (const Link& l : cluster.links) {
    if (l.bandwidth_bits_per_s <= 0) throw ConfigError("cluster: link bandwidth_bits_per_s must be > 0");
    if (l.latency_s < 0) throw ConfigError("cluster: link latency_s must be >= 0");
    if (l.efficiency <= 0 || l.efficiency > 1)
      throw ConfigError("cluster: link efficiency must be in (0, 1]");
    if (l.path_kind == PathKind::CpuStaged && l.staging_copy_bytes_per_s <= 0)
      throw ConfigError("cluster: cpu-staged link must carry a positive staging_copy_bytes_per_s");
    switch (l.endpoints.kind) {
      case ScopeKind::IntraNode:
      case ScopeKind::InterNodeHomogeneous: {
        if (!names.count(l.endpoints.group_a))
          throw ConfigError("cluster: link references unknown group '" + l.endpoints.group_a + "'");
        auto& count = l.endpoints.kind == ScopeKind::IntraNode ? intra_count : inter_count;
        if (++count[l.endpoints.group_a] > 1)
          throw ConfigError("cluster: group '" + l.endpoints.group_a +
                            "' has more than one " +
                            std::string(to_string(l.endpoints.kind)) + " link");
        break;
      }
      case ScopeKind::InterGroup: {
        if (!names.count(l.endpoints.group_a) || !names.count(l.endpoints.group_b))
          throw ConfigError("cluster: inter-group link references undeclared group");
        if (l.endpoints.group_a == l.endpoints.group_b)
          throw ConfigError("cluster: inter-group link must connect two distinct groups");
        auto pair = std::minmax(l.endpoints.group_a, l.endpoints.group_b);
        if (!group_pairs.insert(pair).second)
          throw ConfigError("cluster: duplicate inter-group link between '" + pair.first +
                            "' and '" + pair.second + "'");
        break;
      }
    }
  }
  for (const DeviceGroup& g : cluster.groups) {
    if (intra_count[g.name] != 1)
      throw ConfigError("cluster: group '" + g.name + "' needs exactly one intra-node link");
    if (inter_count[g.name] != 1)
      throw ConfigError("cluster: group '" + g.name +
                        "' needs exactly one inter-node-homogeneous link");
  }
}

void validate_spec(const TrainConfig& cfg) {
  if (cfg.global_batch_size < 1) throw ConfigError("train: global_batch_size must be >= 1");
  if (cfg.micro_batch_size < 1) throw ConfigError("train: micro_batch_size must be >= 1");
  if (cfg.micro_batch_size > cfg.global_batch_size)
    throw ConfigError("train: micro_batch_size must not exceed global_batch_size");
  if (cfg.optimizer_state_multiplier <= 0)
    throw ConfigError("train: optimizer_state_multiplier must be > 0");
}

namespace {

std::string stage_tag(int i) { return "stage " + std::to_string(i); }

}  // namespace

ValidationReport validate_plan(const ParallelPlan& plan, const ModelSpec& model,
                               const ClusterSpec& cluster, const TrainConfig& cfg) {
  ValidationReport report;
  auto violate = [&report](const std::string& msg) { report.violations.push_back(msg); };

  if (plan.stages.empty()) {
    violate("plan has no stages");
    return report;
  }
  if (plan.micro_batches_per_dp_replica < 1)
    violate("micro_batches_per_dp_replica must be >= 1");

  // Layer coverage: contiguous, disjoint, exactly [0, num_layers).
  if (plan.stages.front().layer_range.begin != 0)
    violate("uncovered layers: first stage must start at layer 0");
  for (int i = 0; i < plan.stage_count(); ++i) {
    const StageAssignment& s = plan.stages[i];
    if (s.layer_range.count() < 1) violate(stage_tag(i) + ": empty layer range");
    if (i + 1 < plan.stage_count()) {
      int next = plan.stages[i + 1].layer_range.begin;
      if (s.layer_range.end > next)
        violate(stage_tag(i) + ": overlapping layer ranges");
      else if (s.layer_range.end < next)
        violate(stage_tag(i) + ": non-contiguous layer ranges (gap before stage " +
                std::to_string(i + 1) + ")");
    }
  }
  if (plan.stages.back().layer_range.end < model.num_layers)
    violate("uncovered layers: stages end at layer " +
            std::to_string(plan.stages.back().layer_range.end) + " of " +
            std::to_string(model.num_layers));
  if (plan.stages.back().layer_range.end > model.num_layers)
    violate("layer ranges exceed the model's " + std::to_string(model.num_layers) + " layers");

  // Device accounting per stage and per group.
  std::map<std::string, long long> nodes_by_group;
  int common_dp = plan.stages.front().dp_degree;
  for (int i = 0; i < plan.stage_count(); ++i) {
    const StageAssignment& s = plan.stages[i];
    const DeviceGroup* g = cluster.find_group(s.group);
    if (g == nullptr) {
      violate(stage_tag(i) + ": unknown device group '" + s.group + "'");
      continue;
    }
    if (s.tp_degree < 1 || s.dp_degree < 1 || s.nodes_used < 1) {
      violate(stage_tag(i) + ": tp/dp/nodes_used must be >= 1");
      continue;
    }
    if (s.tp_degree > g->devices_per_node)
      violate(stage_tag(i) + ": TP exceeds node (tp_degree " + std::to_string(s.tp_degree) +
              " > devices_per_node " + std::to_string(g->devices_per_node) + ")");
    else if (g->devices_per_node % s.tp_degree != 0)
      violate(stage_tag(i) + ": tp_degree must divide devices_per_node");
    if (s.dp_degree != common_dp)
      violate(stage_tag(i) + ": dp_degree differs across stages (" +
              std::to_string(s.dp_degree) + " vs " + std::to_string(common_dp) + ")");
    long long block_devices = static_cast<long long>(s.nodes_used) * g->devices_per_node;
    if (block_devices != static_cast<long long>(s.dp_degree) * s.tp_degree)
      violate(stage_tag(i) + ": stage device count mismatch (" + std::to_string(s.nodes_used) +
              " nodes x " + std::to_string(g->devices_per_node) + " devices != dp " +
              std::to_string(s.dp_degree) + " x tp " + std::to_string(s.tp_degree) + ")");
    nodes_by_group[s.group] += s.nodes_used;
  }
  for (const auto& [name, used] : nodes_by_group) {
    const DeviceGroup* g = cluster.find_group(name);
    if (g != nullptr && used > g->node_count)
      violate("group '" + name + "' over-allocated: " + std::to_string(used) + " nodes of " +
              std::to_string(g->node_count));
  }

  // Adjacent stages must be connected.
  for (int i = 0; i + 1 < plan.stage_count(); ++i) {
    const std::string& a = plan.stages[i].group;
    const std::string& b = plan.stages[i + 1].group;
    if (cluster.find_group(a) == nullptr || cluster.find_group(b) == nullptr) continue;
    if (a == b) {
      if (cluster.inter_node_link(a) == nullptr)
        violate("no inter-node link for group '" + a + "' between stages " + std::to_string(i) +
                " and " + std::to_string(i + 1));
    } else if (cluster.inter_group_link(a, b) == nullptr) {
      violate("no heterogeneous link between '" + a + "' and '" + b + "' (stages " +
              std::to_string(i) + "-" + std::to_string(i + 1) + ")");
    }
  }

  // Micro-batch accounting: G = M * B * dp.
  long long B = plan.effective_micro_batch_size(cfg);
  if (B < 1) {
    violate("micro-batch size must be >= 1");
  } else if (common_dp >= 1) {
    long long per_replica = cfg.global_batch_size / common_dp;
    if (cfg.global_batch_size % (static_cast<long long>(common_dp) * B) != 0)
      violate("global_batch_size " + std::to_string(cfg.global_batch_size) +
              " not divisible by dp " + std::to_string(common_dp) + " x micro_batch_size " +
              std::to_string(B));
    else if (plan.micro_batches_per_dp_replica * B != per_replica)
      violate("micro-batch accounting: M " + std::to_string(plan.micro_batches_per_dp_replica) +
              " x B " + std::to_string(B) + " != G/dp " + std::to_string(per_replica));
  }

  return report;
}

const char* to_string(Schedule s) {
  switch (s) {
    case Schedule::GPipe: return "gpipe";
    case Schedule::OneFOneB: return "1f1b";
  }
  return "?";
}

const char* to_string(PathKind k) {
  switch (k) {
    case PathKind::GpuDirect: return "gpu-direct";
    case PathKind::CpuStaged: return "cpu-staged";
  }
  return "?";
}

const char* to_string(ScopeKind k) {
  switch (k) {
    case ScopeKind::IntraNode: return "intra-node";
    case ScopeKind::InterNodeHomogeneous: return "inter-node-homogeneous";
    case ScopeKind::InterGroup: return "inter-group";
  }
  return "?";
}

}  // namespace hetplan
