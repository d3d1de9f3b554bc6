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
#ifndef HETPLAN_PLANNER_HPP_
#define HETPLAN_PLANNER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "hetplan/evaluate.hpp"
#include "hetplan/types.hpp"

namespace hetplan {

struct PlannerConfig {
  // Candidate pipeline degrees; empty means 1..min(num_layers, total nodes).
  std::vector<int> pipeline_degrees;
  bool uniform_split_only = false;
  // Candidate micro-batch sizes B; empty means {TrainConfig.micro_batch_size}.
  std::vector<long long> micro_batch_candidates;
  // A stage is feasible while peak memory <= device memory * headroom.
  double memory_headroom = 0.9;
  // Cap on block orderings evaluated per candidate, in lexicographic order.
  int stage_order_beam_width = 24;
  // All contiguous layer splits are enumerated when their count
  // C(layers-1, stages-1) is at most this; otherwise the proportional split
  // plus iterated +-1 adjacent transfers bound the neighborhood.
  long long exhaustive_split_limit = 2000;
  // Allow pipeline positions to alternate between groups (A,B,A,...).
  // Default keeps each accelerator type in one contiguous segment.
  bool allow_group_interleaving = false;
  // Skip candidates whose serial-compute lower bound exceeds the incumbent.
  // Never changes the returned plan (the bound is admissible and only a
  // strict excess skips); turning it off logs every candidate.
  bool time_bound_pruning = true;
  Schedule schedule = Schedule::OneFOneB;
};

// DFS frame over the three decision levels: pipeline (degree, stage->group
// layout, ordering, layer split), data (dp degree and micro-batching), and
// tensor (per-group tp degree).
struct SearchNode {
  enum class Level { Pipeline, Data, Tensor };
  Level level = Level::Pipeline;
  int pp = 0;
  std::vector<int> stages_per_group;   // pipeline level
  std::vector<int> block_order;        // pipeline level, block indices
  int dp = 0;                          // data level
  long long micro_batch_size = 0;      // data level
  std::vector<int> tp_per_group;       // tensor level
  double bound = 0.0;                  // best-known child cost
};

// Largest-remainder apportionment of `total_layers` proportional to
// `weights`; every stage receives at least one layer (deficits are covered
// by transferring from the largest count). Remainder units go to the
// largest fractional parts, ties to the lowest index. Throws
// InfeasibleError when total_layers < weights.size().
std::vector<int> split_layers(int total_layers, const std::vector<double>& weights);

// One (group, consecutive stage count, tp degree) block of the pipeline.
struct StageBlock {
  const DeviceGroup* group = nullptr;
  int stage_count = 0;
  int tp_degree = 1;
};

// Per-stage load weights in pipeline order: each stage weighs its block's
// effective TFLOPS (peak * efficiency * tp), normalized to sum 1. `model`
// is reserved for per-layer cost shaping; layer requirements are uniform
// across a homogeneous transformer stack.
std::vector<double> stage_weights(const std::vector<StageBlock>& blocks,
                                  const ModelSpec& model);

// Returns the block permutation (indices into `blocks`) whose evaluated
// time is minimal; ties resolve to the lexicographically smallest
// permutation. Evaluation order is lexicographic, truncated at beam_width
// permutations (0 = no cap). `pp` must equal the total stage count.
std::vector<int> order_stages(const std::vector<StageBlock>& blocks, int pp,
                              const std::function<double(const std::vector<int>&)>& evaluator,
                              int beam_width = 0);

struct SearchLogEntry {
  std::string candidate;      // compact JSON descriptor
  double time_s = -1.0;       // simulated time; < 0 when pruned
  std::string prune_reason;   // empty when simulated
};

struct SearchOutcome {
  ParallelPlan plan;
  PlanEvaluation eval;
  long long candidates_simulated = 0;
  long long candidates_pruned = 0;
  std::vector<SearchLogEntry> log;
};

// DFS over the three-level space, pruning stages whose peak memory exceeds
// the device budget; returns the plan with the smallest simulated iteration
// time (ties: lowest pp, then lexicographically smallest plan encoding).
// `jobs` > 1 evaluates independent subtrees concurrently without changing
// the result. Throws InfeasibleError listing the binding constraint per
// candidate when nothing is feasible.
SearchOutcome search(const ModelSpec& model, const ClusterSpec& cluster,
                     const TrainConfig& cfg, const PlannerConfig& pcfg, int jobs = 1);

}  // namespace hetplan

#endif  // HETPLAN_PLANNER_HPP_
