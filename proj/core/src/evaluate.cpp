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
#include "hetplan/evaluate.hpp"

#include <algorithm>

#include "hetplan/errors.hpp"

namespace hetplan {

PlanCosts plan_stage_times(const ParallelPlan& plan, const ModelSpec& model,
                           const ClusterSpec& cluster, const TrainConfig& cfg) {
  const int P = plan.stage_count();
  const long long B = plan.effective_micro_batch_size(cfg);
  PlanCosts costs;
  costs.times.resize(P);
  costs.dp_sync_s.assign(P, 0.0);

  double p2p_volume =
      p2p_activation_volume(B, model.seq_length, model.hidden_size, model.bytes_per_element);

  for (int i = 0; i < P; ++i) {
    const StageAssignment& stage = plan.stages[i];
    const DeviceGroup* group = cluster.find_group(stage.group);
    if (group == nullptr) throw PlanError("unknown device group '" + stage.group + "'");
    const Link* intra = cluster.intra_node_link(stage.group);
    if (intra == nullptr) throw PlanError("group '" + stage.group + "' has no intra-node link");

    LayerCost per_layer = layer_cost(model, *group, *intra, stage.tp_degree, B);
    double layers = stage.layer_range.count();
    // Embedding / LM head ride on the first and last stages as extra layer
    // multiples (0 by default).
    if (stage.layer_range.begin == 0) layers += model.edge_layer_cost_multiplier;
    if (stage.layer_range.end == model.num_layers) layers += model.edge_layer_cost_multiplier;
    costs.times[i].fwd_s = layers * per_layer.fwd_s;
    costs.times[i].bwd_s = layers * per_layer.bwd_s;

    if (i + 1 < P) {
      const StageAssignment& next = plan.stages[i + 1];
      const Link* hop = stage.group == next.group
                            ? cluster.inter_node_link(stage.group)
                            : cluster.inter_group_link(stage.group, next.group);
      if (hop == nullptr)
        throw PlanError("no link between stages " + std::to_string(i) + " and " +
                        std::to_string(i + 1) + " ('" + stage.group + "' -> '" + next.group +
                        "')");
      double t = hop_time(p2p_volume, *hop).time_s;
      costs.times[i].send_fwd_s = t;
      // Activation gradients flowing back across the same hop.
      costs.times[i + 1].send_bwd_s = hop_time(p2p_volume, *hop).time_s;
    }

    if (stage.dp_degree > 1) {
      double grad_bytes =
          static_cast<double>(stage.layer_range.count()) * per_layer.param_bytes / stage.tp_degree;
      const Link* dp_link = stage.nodes_used > 1 ? cluster.inter_node_link(stage.group) : intra;
      if (dp_link == nullptr)
        throw PlanError("group '" + stage.group + "' has no inter-node link for DP sync");
      costs.dp_sync_s[i] =
          collective_time(grad_bytes, stage.dp_degree, *dp_link, CollectiveKind::AllReduce);
    }
  }
  return costs;
}

PlanEvaluation evaluate_plan_unchecked(const ParallelPlan& plan, const ModelSpec& model,
                                       const ClusterSpec& cluster, const TrainConfig& cfg,
                                       bool record_trace) {
  PlanEvaluation out;
  out.costs = plan_stage_times(plan, model, cluster, cfg);
  out.micro_batches = plan.micro_batches_per_dp_replica;
  out.total_devices = plan.total_devices();
  out.sim = simulate(plan.schedule, out.costs.times, out.micro_batches, record_trace);
  out.pipeline_time_s = out.sim.iteration_time_s;

  // Gradient sync is charged per stage after the pipeline flush; it neither
  // overlaps backward compute nor appears in the pipeline trace.
  const int P = plan.stage_count();
  double iteration = 0.0;
  for (int i = 0; i < P; ++i) {
    out.sim.per_stage_busy_s[i] += out.costs.dp_sync_s[i];
    iteration =
        std::max(iteration, out.sim.per_stage_compute_end_s[i] + out.costs.dp_sync_s[i]);
  }
  out.sim.iteration_time_s = std::max(out.pipeline_time_s, iteration);
  BubbleRatios ratios = bubble_ratio(out.sim);
  out.sim.per_stage_bubble_ratio = std::move(ratios.per_stage);
  out.sim.aggregate_bubble_ratio = ratios.aggregate;

  out.sim.peak_memory_bytes.assign(P, 0.0);
  for (int i = 0; i < P; ++i)
    out.sim.peak_memory_bytes[i] =
        stage_memory(plan.stages[i], model, cfg, plan, out.sim.peak_in_flight[i]);
  return out;
}

PlanEvaluation evaluate_plan(const ParallelPlan& plan, const ModelSpec& model,
                             const ClusterSpec& cluster, const TrainConfig& cfg,
                             bool record_trace) {
  ValidationReport report = validate_plan(plan, model, cluster, cfg);
  if (!report.ok())
    throw PlanError("plan failed validation (" + std::to_string(report.violations.size()) +
                        " violations)",
                    report.violations);
  return evaluate_plan_unchecked(plan, model, cluster, cfg, record_trace);
}

}  // namespace hetplan
