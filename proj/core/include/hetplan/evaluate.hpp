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
#ifndef HETPLAN_EVALUATE_HPP_
#define HETPLAN_EVALUATE_HPP_

#include <vector>

#include "hetplan/cost_model.hpp"
#include "hetplan/sim.hpp"
#include "hetplan/types.hpp"

namespace hetplan {

// Stage timings plus the data-parallel gradient-sync term the simulator does
// not consume (it is charged after the pipeline flush).
struct PlanCosts {
  std::vector<StageTimes> times;
  std::vector<double> dp_sync_s;
};

// Derives per-stage micro-batch times and hop times from the analytic cost
// model. Throws PlanError when an adjacent stage pair lacks a link.
PlanCosts plan_stage_times(const ParallelPlan& plan, const ModelSpec& model,
                           const ClusterSpec& cluster, const TrainConfig& cfg);

struct PlanEvaluation {
  SimResult sim;             // iteration_time_s includes the post-flush DP sync
  double pipeline_time_s = 0.0;  // flush time before gradient sync
  PlanCosts costs;
  long long micro_batches = 0;
  long long total_devices = 0;
};

// Full plan evaluation: validate, build stage times, simulate, append the
// per-stage DP gradient sync after the flush, and fill peak memory from the
// observed in-flight activation counts. Throws PlanError listing violations
// when the plan does not validate.
PlanEvaluation evaluate_plan(const ParallelPlan& plan, const ModelSpec& model,
                             const ClusterSpec& cluster, const TrainConfig& cfg,
                             bool record_trace = true);

// evaluate_plan without the validation pass, for callers that construct
// plans valid by construction (the planner's inner loop).
PlanEvaluation evaluate_plan_unchecked(const ParallelPlan& plan, const ModelSpec& model,
                                       const ClusterSpec& cluster, const TrainConfig& cfg,
                                       bool record_trace = true);

}  // namespace hetplan

#endif  // HETPLAN_EVALUATE_HPP_
