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
#ifndef HETPLAN_JSON_IO_HPP_
#define HETPLAN_JSON_IO_HPP_

#include <string>

#include "json.hpp"

#include "hetplan/planner.hpp"
#include "hetplan/sim.hpp"
#include "hetplan/types.hpp"

namespace hetplan {

inline constexpr int kSchemaVersion = 1;

// Document parsers. All validate invariants and throw ConfigError with the
// offending field on bad input. Field names match the type definitions.
ModelSpec model_from_json(const nlohmann::json& j);
ClusterSpec cluster_from_json(const nlohmann::json& j);
TrainConfig train_from_json(const nlohmann::json& j);
PlannerConfig planner_from_json(const nlohmann::json& j);
ParallelPlan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelSpec& m);
nlohmann::json to_json(const ClusterSpec& c);
nlohmann::json to_json(const TrainConfig& t);
nlohmann::json to_json(const PlannerConfig& p);
nlohmann::json to_json(const ParallelPlan& p);  // carries schema_version
nlohmann::json to_json(const TraceEvent& e);
nlohmann::json trace_to_json(const std::vector<TraceEvent>& trace);

// FNV-1a 64-bit content digest, 16 hex chars. Provenance, not cryptography.
std::string digest_hex(std::string_view bytes);

// Reads a whole file; throws ConfigError when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

struct LoadedJson {
  nlohmann::json doc;
  std::string digest;  // of the raw file bytes
};
LoadedJson load_json_file(const std::string& path);

// Applies one `dotted.path=value` override to a parsed document. The value
// is parsed as JSON when possible, else taken as a string. Array elements
// are addressed by index ("groups.0.peak_tflops"). Throws ConfigError on
// unknown paths.
void apply_override(nlohmann::json& doc, const std::string& dotted_path,
                    const std::string& value);

}  // namespace hetplan

#endif  // HETPLAN_JSON_IO_HPP_
