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
#include "hetplan/json_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "hetplan/errors.hpp"

namespace hetplan {

namespace {

using nlohmann::json;

template <typename T>
T require(const json& j, const char* key, const char* ctx) {
  if (!j.contains(key))
    throw ConfigError(std::string(ctx) + ": missing required field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(ctx) + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback, const char* ctx) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(ctx) + ": field '" + key + "': " + e.what());
  }
}

Schedule schedule_from_string(const std::string& s) {
  if (s == "gpipe") return Schedule::GPipe;
  if (s == "1f1b") return Schedule::OneFOneB;
  throw ConfigError("unknown schedule '" + s + "' (expected 'gpipe' or '1f1b')");
}

PathKind path_kind_from_string(const std::string& s) {
  if (s == "gpu-direct") return PathKind::GpuDirect;
  if (s == "cpu-staged") return PathKind::CpuStaged;
  throw ConfigError("unknown path_kind '" + s + "'");
}

ScopeKind scope_kind_from_string(const std::string& s) {
  if (s == "intra-node") return ScopeKind::IntraNode;
  if (s == "inter-node-homogeneous") return ScopeKind::InterNodeHomogeneous;
  if (s == "inter-group") return ScopeKind::InterGroup;
  throw ConfigError("unknown link scope kind '" + s + "'");
}

const char* event_kind_string(EventKind k) {
  switch (k) {
    case EventKind::F: return "F";
    case EventKind::B: return "B";
    case EventKind::SendF: return "SendF";
    case EventKind::SendB: return "SendB";
  }
  return "?";
}

}  // namespace

ModelSpec model_from_json(const json& j) {
  ModelSpec m;
  m.num_layers = require<int>(j, "num_layers", "model");
  m.hidden_size = require<long long>(j, "hidden_size", "model");
  m.seq_length = require<long long>(j, "seq_length", "model");
  m.vocab_size = optional_field<long long>(j, "vocab_size", 0, "model");
  m.num_heads = require<int>(j, "num_heads", "model");
  m.bytes_per_element = optional_field<int>(j, "bytes_per_element", 2, "model");
  m.activation_bytes_per_token_per_hidden =
      optional_field<double>(j, "activation_bytes_per_token_per_hidden", 34.0, "model");
  m.edge_layer_cost_multiplier =
      optional_field<double>(j, "edge_layer_cost_multiplier", 0.0, "model");
  validate_spec(m);
  return m;
}

json to_json(const ModelSpec& m) {
  return json{{"num_layers", m.num_layers},
              {"hidden_size", m.hidden_size},
              {"seq_length", m.seq_length},
              {"vocab_size", m.vocab_size},
              {"num_heads", m.num_heads},
              {"bytes_per_element", m.bytes_per_element},
              {"activation_bytes_per_token_per_hidden", m.activation_bytes_per_token_per_hidden},
              {"edge_layer_cost_multiplier", m.edge_layer_cost_multiplier}};
}

ClusterSpec cluster_from_json(const json& j) {
  ClusterSpec c;
  if (!j.contains("groups") || !j.at("groups").is_array())
    throw ConfigError("cluster: 'groups' array required");
  for (const json& gj : j.at("groups")) {
    DeviceGroup g;
    g.name = require<std::string>(gj, "name", "cluster.group");
    g.peak_tflops = require<double>(gj, "peak_tflops", "cluster.group");
    g.memory_bytes = require<double>(gj, "memory_bytes", "cluster.group");
    g.node_count = require<int>(gj, "node_count", "cluster.group");
    g.devices_per_node = require<int>(gj, "devices_per_node", "cluster.group");
    g.compute_efficiency = optional_field<double>(gj, "compute_efficiency", 1.0, "cluster.group");
    g.bwd_fwd_ratio = optional_field<double>(gj, "bwd_fwd_ratio", 2.0, "cluster.group");
    c.groups.push_back(std::move(g));
  }
  if (!j.contains("links") || !j.at("links").is_array())
    throw ConfigError("cluster: 'links' array required");
  for (const json& lj : j.at("links")) {
    Link l;
    const json& ep = lj.contains("endpoints") ? lj.at("endpoints") : lj;
    l.endpoints.kind = scope_kind_from_string(require<std::string>(ep, "kind", "cluster.link"));
    if (l.endpoints.kind == ScopeKind::InterGroup) {
      l.endpoints.group_a = require<std::string>(ep, "group_a", "cluster.link");
      l.endpoints.group_b = require<std::string>(ep, "group_b", "cluster.link");
    } else {
      l.endpoints.group_a = require<std::string>(ep, "group", "cluster.link");
    }
    l.bandwidth_bits_per_s = require<double>(lj, "bandwidth_bits_per_s", "cluster.link");
    l.latency_s = optional_field<double>(lj, "latency_s", 0.0, "cluster.link");
    l.path_kind = path_kind_from_string(
        optional_field<std::string>(lj, "path_kind", "gpu-direct", "cluster.link"));
    // Defaults keyed by path: IB-class fabrics reach ~85% of nominal,
    // Ethernet ~76% (18-20 of 25 Gb/s), PCIe staging ~16 GB/s.
    double default_eff = l.path_kind == PathKind::CpuStaged ? 0.76 : 0.85;
    l.efficiency = optional_field<double>(lj, "efficiency", default_eff, "cluster.link");
    double default_staging = l.path_kind == PathKind::CpuStaged ? 16e9 : 0.0;
    l.staging_copy_bytes_per_s =
        optional_field<double>(lj, "staging_copy_bytes_per_s", default_staging, "cluster.link");
    c.links.push_back(std::move(l));
  }
  validate_spec(c);
  return c;
}

json to_json(const ClusterSpec& c) {
  json groups = json::array();
  for (const DeviceGroup& g : c.groups) {
    groups.push_back(json{{"name", g.name},
                          {"peak_tflops", g.peak_tflops},
                          {"memory_bytes", g.memory_bytes},
                          {"node_count", g.node_count},
                          {"devices_per_node", g.devices_per_node},
                          {"compute_efficiency", g.compute_efficiency},
                          {"bwd_fwd_ratio", g.bwd_fwd_ratio}});
  }
  json links = json::array();
  for (const Link& l : c.links) {
    json ep{{"kind", to_string(l.endpoints.kind)}};
    if (l.endpoints.kind == ScopeKind::InterGroup) {
      ep["group_a"] = l.endpoints.group_a;
      ep["group_b"] = l.endpoints.group_b;
    } else {
      ep["group"] = l.endpoints.group_a;
    }
    json lj{{"endpoints", ep},
            {"bandwidth_bits_per_s", l.bandwidth_bits_per_s},
            {"latency_s", l.latency_s},
            {"efficiency", l.efficiency},
            {"path_kind", to_string(l.path_kind)}};
    if (l.path_kind == PathKind::CpuStaged)
      lj["staging_copy_bytes_per_s"] = l.staging_copy_bytes_per_s;
    links.push_back(std::move(lj));
  }
  return json{{"groups", groups}, {"links", links}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.global_batch_size = require<long long>(j, "global_batch_size", "train");
  t.micro_batch_size = require<long long>(j, "micro_batch_size", "train");
  t.optimizer_state_multiplier =
      optional_field<double>(j, "optimizer_state_multiplier", 8.0, "train");
  validate_spec(t);
  return t;
}

json to_json(const TrainConfig& t) {
  return json{{"global_batch_size", t.global_batch_size},
              {"micro_batch_size", t.micro_batch_size},
              {"optimizer_state_multiplier", t.optimizer_state_multiplier}};
}

PlannerConfig planner_from_json(const json& j) {
  PlannerConfig p;
  p.pipeline_degrees =
      optional_field<std::vector<int>>(j, "pipeline_degrees", {}, "planner");
  p.uniform_split_only = optional_field<bool>(j, "uniform_split_only", false, "planner");
  p.micro_batch_candidates =
      optional_field<std::vector<long long>>(j, "micro_batch_candidates", {}, "planner");
  p.memory_headroom = optional_field<double>(j, "memory_headroom", 0.9, "planner");
  p.stage_order_beam_width = optional_field<int>(j, "stage_order_beam_width", 24, "planner");
  p.exhaustive_split_limit =
      optional_field<long long>(j, "exhaustive_split_limit", 2000, "planner");
  p.allow_group_interleaving =
      optional_field<bool>(j, "allow_group_interleaving", false, "planner");
  p.time_bound_pruning = optional_field<bool>(j, "time_bound_pruning", true, "planner");
  p.schedule = schedule_from_string(
      optional_field<std::string>(j, "schedule", "1f1b", "planner"));
  return p;
}

json to_json(const PlannerConfig& p) {
  return json{{"pipeline_degrees", p.pipeline_degrees},
              {"uniform_split_only", p.uniform_split_only},
              {"micro_batch_candidates", p.micro_batch_candidates},
              {"memory_headroom", p.memory_headroom},
              {"stage_order_beam_width", p.stage_order_beam_width},
              {"exhaustive_split_limit", p.exhaustive_split_limit},
              {"allow_group_interleaving", p.allow_group_interleaving},
              {"time_bound_pruning", p.time_bound_pruning},
              {"schedule", to_string(p.schedule)}};
}

ParallelPlan plan_from_json(const json& j) {
  if (!j.contains("schema_version"))
    throw ConfigError("plan: missing schema_version");
  int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion)
    throw ConfigError("plan: unsupported schema_version " + std::to_string(version));
  ParallelPlan p;
  p.schedule = schedule_from_string(require<std::string>(j, "schedule", "plan"));
  p.micro_batches_per_dp_replica =
      require<long long>(j, "micro_batches_per_dp_replica", "plan");
  p.micro_batch_size = optional_field<long long>(j, "micro_batch_size", 0, "plan");
  if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty())
    throw ConfigError("plan: non-empty 'stages' array required");
  for (const json& sj : j.at("stages")) {
    StageAssignment s;
    auto range = require<std::vector<int>>(sj, "layer_range", "plan.stage");
    if (range.size() != 2) throw ConfigError("plan.stage: layer_range must be [begin, end)");
    s.layer_range = {range[0], range[1]};
    s.group = require<std::string>(sj, "group", "plan.stage");
    s.nodes_used = require<int>(sj, "nodes_used", "plan.stage");
    s.tp_degree = require<int>(sj, "tp_degree", "plan.stage");
    s.dp_degree = require<int>(sj, "dp_degree", "plan.stage");
    p.stages.push_back(std::move(s));
  }
  if (j.contains("inputs"))
    p.input_digests = j.at("inputs").get<std::map<std::string, std::string>>();
  return p;
}

json to_json(const ParallelPlan& p) {
  json stages = json::array();
  for (const StageAssignment& s : p.stages) {
    stages.push_back(json{{"layer_range", {s.layer_range.begin, s.layer_range.end}},
                          {"group", s.group},
                          {"nodes_used", s.nodes_used},
                          {"tp_degree", s.tp_degree},
                          {"dp_degree", s.dp_degree}});
  }
  json out{{"schema_version", kSchemaVersion},
           {"schedule", to_string(p.schedule)},
           {"micro_batches_per_dp_replica", p.micro_batches_per_dp_replica},
           {"micro_batch_size", p.micro_batch_size},
           {"stages", stages}};
  if (!p.input_digests.empty()) out["inputs"] = p.input_digests;
  return out;
}

json to_json(const TraceEvent& e) {
  return json{{"stage", e.stage},
              {"kind", event_kind_string(e.kind)},
              {"microbatch", e.microbatch},
              {"start_s", e.start_s},
              {"end_s", e.end_s}};
}

json trace_to_json(const std::vector<TraceEvent>& trace) {
  json arr = json::array();
  for (const TraceEvent& e : trace) arr.push_back(to_json(e));
  return arr;
}

std::string digest_hex(std::string_view bytes) {
  // FNV-1a 64.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

LoadedJson load_json_file(const std::string& path) {
  std::string bytes = read_file(path);
  LoadedJson out;
  out.digest = digest_hex(bytes);
  try {
    out.doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ConfigError("file '" + path + "': " + e.what());
  }
  return out;
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw ConfigError("override: empty path");
  std::vector<std::string> parts;
  std::stringstream ss(dotted_path);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);

  json* cursor = &doc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& key = parts[i];
    bool is_index = !key.empty() && std::all_of(key.begin(), key.end(),
                                                [](unsigned char c) { return std::isdigit(c); });
    bool last = i + 1 == parts.size();
    if (is_index && cursor->is_array()) {
      std::size_t idx = std::stoul(key);
      if (idx >= cursor->size())
        throw ConfigError("override '" + dotted_path + "': index " + key + " out of range");
      cursor = &(*cursor)[idx];
    } else if (cursor->is_object()) {
      if (!cursor->contains(key) && !last)
        throw ConfigError("override '" + dotted_path + "': unknown path element '" + key + "'");
      cursor = &(*cursor)[key];
    } else {
      throw ConfigError("override '" + dotted_path + "': '" + key +
                        "' does not address an object or array");
    }
    if (last) {
      json parsed = json::parse(value, nullptr, false);
      *cursor = parsed.is_discarded() ? json(value) : parsed;
    }
  }
}

}  // namespace hetplan
