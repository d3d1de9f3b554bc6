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
#include "hetplan/profile.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hetplan/cost_model.hpp"
#include "hetplan/errors.hpp"

namespace hetplan {

namespace {

using nlohmann::json;

constexpr double kEfficiencyClamp = 1.5;

OpKind op_kind_from_string(const std::string& s) {
  if (s == "transformer_layer") return OpKind::TransformerLayer;
  if (s == "embedding") return OpKind::Embedding;
  if (s == "lm_head") return OpKind::LmHead;
  throw ConfigError("unknown op_kind '" + s + "'");
}

ProfileRecord record_from_json(const json& j) {
  ProfileRecord r;
  r.device_type = j.at("device_type").get<std::string>();
  r.op_kind = op_kind_from_string(j.value("op_kind", std::string("transformer_layer")));
  r.micro_batch = j.at("micro_batch").get<long long>();
  r.seq_length = j.at("seq_length").get<long long>();
  r.hidden = j.at("hidden").get<long long>();
  r.tp_degree = j.value("tp_degree", 1);
  r.fwd_ms = j.at("fwd_ms").get<double>();
  r.bwd_ms = j.at("bwd_ms").get<double>();
  if (r.fwd_ms <= 0 || r.bwd_ms <= 0) throw ConfigError("fwd_ms and bwd_ms must be > 0");
  if (r.micro_batch < 1 || r.seq_length < 1 || r.hidden < 1)
    throw ConfigError("micro_batch, seq_length, hidden must be >= 1");
  if (r.tp_degree < 1) throw ConfigError("tp_degree must be >= 1");
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ParsedProfiles parse_profiles(std::istream& in) {
  ParsedProfiles out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      out.diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ParsedProfiles parse_profiles(const std::string& text) {
  std::istringstream in(text);
  return parse_profiles(in);
}

CalibrationResult calibrate(const std::vector<ProfileRecord>& records,
                            const ModelSpec& model, const ClusterSpec& cluster) {
  CalibrationResult result;
  result.cluster = cluster;

  std::map<std::string, std::vector<double>> efficiency_samples;
  std::map<std::string, std::vector<double>> ratio_samples;
  for (const ProfileRecord& r : records) {
    const DeviceGroup* group = cluster.find_group(r.device_type);
    if (group == nullptr) {
      result.diagnostics.push_back("record for unknown device_type '" + r.device_type +
                                   "' skipped");
      continue;
    }
    if (r.op_kind != OpKind::TransformerLayer) continue;
    // Normalize through the analytic formula at the record's own shape:
    // ideal seconds at efficiency 1 over measured seconds.
    ModelSpec shape = model;
    shape.seq_length = r.seq_length;
    shape.hidden_size = r.hidden;
    double flops = layer_flops(shape, r.micro_batch, Direction::Forward);
    double ideal_s = flops / (r.tp_degree * group->peak_tflops * 1e12);
    efficiency_samples[r.device_type].push_back(ideal_s / (r.fwd_ms / 1e3));
    ratio_samples[r.device_type].push_back(r.bwd_ms / r.fwd_ms);
  }

  for (DeviceGroup& g : result.cluster.groups) {
    auto it = efficiency_samples.find(g.name);
    if (it == efficiency_samples.end()) continue;  // no records: keep defaults
    double eff = median(it->second);
    if (eff > kEfficiencyClamp) {
      result.diagnostics.push_back(
          "group '" + g.name + "': calibrated efficiency " + std::to_string(eff) +
          " clamped to 1.5 (peak_tflops entry looks wrong)");
      eff = kEfficiencyClamp;
    }
    g.compute_efficiency = eff;
    double ratio = median(ratio_samples[g.name]);
    if (ratio < 1.0) {
      // Backward is costed at no less than forward.
      result.diagnostics.push_back("group '" + g.name + "': profiled bwd/fwd ratio " +
                                   std::to_string(ratio) + " raised to 1.0");
      ratio = 1.0;
    }
    g.bwd_fwd_ratio = ratio;
  }
  return result;
}

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::TransformerLayer: return "transformer_layer";
    case OpKind::Embedding: return "embedding";
    case OpKind::LmHead: return "lm_head";
  }
  return "?";
}

}  // namespace hetplan
