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
#ifndef HETPLAN_PROFILE_HPP_
#define HETPLAN_PROFILE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "hetplan/types.hpp"

namespace hetplan {

enum class OpKind { TransformerLayer, Embedding, LmHead };

// One measured timing from a small-cluster profiling run.
struct ProfileRecord {
  std::string device_type;  // must name a ClusterSpec group at calibration time
  OpKind op_kind = OpKind::TransformerLayer;
  long long micro_batch = 1;  // B
  long long seq_length = 0;   // L
  long long hidden = 0;       // H
  int tp_degree = 1;
  double fwd_ms = 0.0;
  double bwd_ms = 0.0;

  friend bool operator==(const ProfileRecord&, const ProfileRecord&) = default;
};

struct ParsedProfiles {
  std::vector<ProfileRecord> records;
  std::vector<std::string> diagnostics;  // "line N: <problem>", non-fatal
};

// Newline-delimited JSON, one record per line. Malformed lines become
// diagnostics; parsing always continues.
ParsedProfiles parse_profiles(std::istream& in);
ParsedProfiles parse_profiles(const std::string& text);

struct CalibrationResult {
  ClusterSpec cluster;  // groups updated in place
  std::vector<std::string> diagnostics;
};

// Fits per-group compute_efficiency and bwd/fwd ratio from measured layer
// timings. Each record is normalized through the analytic FLOPs formula at
// its own (B, L, H, tp), so one profile shape calibrates all shapes;
// per-group medians keep stragglers out. Groups without records keep their
// configured values. Efficiencies above 1.5 are clamped with a diagnostic
// (they indicate a wrong peak-TFLOPS entry).
CalibrationResult calibrate(const std::vector<ProfileRecord>& records,
                            const ModelSpec& model, const ClusterSpec& cluster);

const char* to_string(OpKind k);

}  // namespace hetplan

#endif  // HETPLAN_PROFILE_HPP_
