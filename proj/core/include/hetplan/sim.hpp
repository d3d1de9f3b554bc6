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
#ifndef HETPLAN_SIM_HPP_
#define HETPLAN_SIM_HPP_

#include <vector>

#include "hetplan/types.hpp"

namespace hetplan {

// Per-micro-batch timings of one pipeline stage. send_* is the hop to the
// next (forward) / previous (backward) stage; the last/first stage's
// respective entries are ignored.
struct StageTimes {
  double fwd_s = 0.0;
  double bwd_s = 0.0;
  double send_fwd_s = 0.0;
  double send_bwd_s = 0.0;
};

enum class EventKind { F, B, SendF, SendB };

struct TraceEvent {
  int stage = 0;
  EventKind kind = EventKind::F;
  int microbatch = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct SimResult {
  double iteration_time_s = 0.0;
  std::vector<double> per_stage_busy_s;
  std::vector<double> per_stage_compute_end_s;  // last F/B end per stage
  std::vector<double> per_stage_bubble_ratio;
  double aggregate_bubble_ratio = 0.0;
  std::vector<int> peak_in_flight;          // retained activations per stage
  std::vector<double> peak_memory_bytes;    // filled by evaluate_plan
  std::vector<TraceEvent> trace;            // sorted (start, stage, kind, microbatch)
};

// Deterministic event simulation of one training iteration.
//
// Execution rules:
//  - forward of micro-batch m at stage i>0 waits for stage i-1's forward of
//    m plus its SendF hop; symmetric for backward from stage i+1;
//  - each stage's compute resource is serial; sends occupy a per-directed-
//    link channel and overlap with compute;
//  - 1F1B: stage i runs min(P-i, M) warm-up forwards, then alternates one
//    backward and one forward; GPipe runs all forwards then all backwards.
//
// peak_memory_bytes is left empty here (it needs model/config context; see
// evaluate_plan). `record_trace=false` skips event recording for hot loops
// (the planner); all scalar results are identical either way. Throws
// std::invalid_argument on negative times or M < 1.
SimResult simulate(Schedule schedule, const std::vector<StageTimes>& times,
                   long long micro_batches, bool record_trace = true);

struct BubbleRatios {
  std::vector<double> per_stage;
  double aggregate = 0.0;
};

// 1 - busy/iteration per stage; aggregate 1 - sum(busy)/(P*iteration).
BubbleRatios bubble_ratio(const SimResult& result);

// Warm-up depth / retained-activation bound of 1F1B at stage i (0-based).
inline int one_f_one_b_in_flight(int stage, int stage_count, long long micro_batches) {
  long long bound = stage_count - stage;
  return static_cast<int>(bound < micro_batches ? bound : micro_batches);
}

}  // namespace hetplan

#endif  // HETPLAN_SIM_HPP_
