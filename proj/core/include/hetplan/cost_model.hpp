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
#ifndef HETPLAN_COST_MODEL_HPP_
#define HETPLAN_COST_MODEL_HPP_

#include <string>
#include <vector>

#include "hetplan/types.hpp"

namespace hetplan {

enum class Direction { Forward, Backward };
enum class CollectiveKind { AllReduce, AllGather };

// Analytic per-layer costs for one micro-batch on one device group.
struct LayerCost {
  double fwd_s = 0.0;
  double bwd_s = 0.0;
  double activation_bytes_per_microbatch = 0.0;  // full (un-sharded) per layer
  double param_bytes = 0.0;                      // weight bytes per layer, un-sharded
};

struct CommHop {
  std::string medium;  // "wire", "staging-d2h", "staging-h2d"
  double time_s = 0.0;
};

// One point-to-point transfer, broken into hops for audit.
struct CommCost {
  double volume_bytes = 0.0;
  double time_s = 0.0;  // latency + sum of hop times
  std::vector<CommHop> hops;
};

// Bytes crossing a pipeline boundary for one micro-batch: B*L*H elements.
double p2p_activation_volume(long long micro_batch, long long seq_length,
                             long long hidden, int bytes_per_element);

// Dense-transformer per-layer FLOPs estimate: 24*B*L*H^2 + 4*B*L^2*H forward,
// 2x that backward. Used both for timing (ideal, before efficiency) and for
// MFU accounting.
double layer_flops(const ModelSpec& model, long long micro_batch, Direction dir);

// flops / (tp * peak * efficiency). TP scaling is ideal; its collectives are
// charged separately via collective_time. Throws std::domain_error on a
// non-positive peak.
double compute_time(double flops, const DeviceGroup& group, int tp_degree);

// Point-to-point transfer time over one link. gpu-direct crosses the wire
// once; cpu-staged adds a device->host and a host->device copy.
CommCost hop_time(double volume_bytes, const Link& link);

// Ring collective: allreduce moves 2*(ranks-1)/ranks * volume per rank,
// allgather (ranks-1)/ranks, each step paying the link latency. ranks=1 -> 0.
double collective_time(double volume_per_rank_bytes, int ranks, const Link& link,
                       CollectiveKind kind);

// Per-accelerator bytes for one stage: parameter states (weights scaled by
// the optimizer-state multiplier, sharded by TP) plus `in_flight` retained
// micro-batch activations. `in_flight` is schedule-dependent and comes from
// the simulator.
double stage_memory(const StageAssignment& stage, const ModelSpec& model,
                    const TrainConfig& cfg, const ParallelPlan& plan, int in_flight);

// Per-layer costs for a micro-batch of `micro_batch` sequences on `group`.
// Backward time uses the group's calibrated bwd/fwd ratio; TP allreduces
// (2 forward, 2 backward per layer) are included in the times.
LayerCost layer_cost(const ModelSpec& model, const DeviceGroup& group,
                     const Link& intra_link, int tp_degree, long long micro_batch);

}  // namespace hetplan

#endif  // HETPLAN_COST_MODEL_HPP_
