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
#include "hetplan/cost_model.hpp"

#include <stdexcept>

#include "hetplan/errors.hpp"

namespace hetplan {

double p2p_activation_volume(long long micro_batch, long long seq_length,
                             long long hidden, int bytes_per_element) {
  return static_cast<double>(micro_batch) * static_cast<double>(seq_length) *
         static_cast<double>(hidden) * bytes_per_element;
}

double layer_flops(const ModelSpec& model, long long micro_batch, Direction dir) {
  const double B = static_cast<double>(micro_batch);
  const double L = static_cast<double>(model.seq_length);
  const double H = static_cast<double>(model.hidden_size);
  double fwd = 24.0 * B * L * H * H + 4.0 * B * L * L * H;
  return dir == Direction::Forward ? fwd : 2.0 * fwd;
}

double compute_time(double flops, const DeviceGroup& group, int tp_degree) {
  if (group.peak_tflops <= 0) throw std::domain_error("compute_time: peak_tflops must be > 0");
  if (tp_degree < 1) throw std::domain_error("compute_time: tp_degree must be >= 1");
  return flops / (tp_degree * group.peak_tflops * 1e12 * group.compute_efficiency);
}

CommCost hop_time(double volume_bytes, const Link& link) {
  if (volume_bytes < 0) throw std::domain_error("hop_time: volume must be >= 0");
  CommCost cost;
  cost.volume_bytes = volume_bytes;
  double wire = volume_bytes * 8.0 / (link.bandwidth_bits_per_s * link.efficiency);
  if (link.path_kind == PathKind::CpuStaged) {
    if (link.staging_copy_bytes_per_s <= 0)
      throw ConfigError("hop_time: cpu-staged link without staging_copy_bytes_per_s");
    double copy = volume_bytes / link.staging_copy_bytes_per_s;
    cost.hops.push_back({"staging-d2h", copy});
    cost.hops.push_back({"wire", wire});
    cost.hops.push_back({"staging-h2d", copy});
  } else {
    cost.hops.push_back({"wire", wire});
  }
  cost.time_s = link.latency_s;
  for (const CommHop& h : cost.hops) cost.time_s += h.time_s;
  return cost;
}

double collective_time(double volume_per_rank_bytes, int ranks, const Link& link,
                       CollectiveKind kind) {
  if (ranks < 1) throw std::domain_error("collective_time: ranks must be >= 1");
  if (ranks == 1) return 0.0;
  // Ring schedule: allreduce = reduce-scatter + allgather, 2*(r-1) steps;
  // allgather alone is (r-1) steps.
  double factor = kind == CollectiveKind::AllReduce ? 2.0 : 1.0;
  double steps = factor * (ranks - 1);
  double moved = factor * (ranks - 1) / static_cast<double>(ranks) * volume_per_rank_bytes;
  return steps * link.latency_s + moved * 8.0 / (link.bandwidth_bits_per_s * link.efficiency);
}

double stage_memory(const StageAssignment& stage, const ModelSpec& model,
                    const TrainConfig& cfg, const ParallelPlan& plan, int in_flight) {
  const double layers = stage.layer_range.count();
  if (layers <= 0) return 0.0;
  const double H = static_cast<double>(model.hidden_size);
  double weight_bytes = layers * 12.0 * H * H * model.bytes_per_element;
  double param_state = weight_bytes / stage.tp_degree * cfg.optimizer_state_multiplier;
  double B = static_cast<double>(plan.effective_micro_batch_size(cfg));
  double act_per_mb = layers * B * static_cast<double>(model.seq_length) * H *
                      model.activation_bytes_per_token_per_hidden;
  return param_state + in_flight * act_per_mb / stage.tp_degree;
}

LayerCost layer_cost(const ModelSpec& model, const DeviceGroup& group,
                     const Link& intra_link, int tp_degree, long long micro_batch) {
  LayerCost cost;
  double fwd_flops = layer_flops(model, micro_batch, Direction::Forward);
  double fwd_compute = compute_time(fwd_flops, group, tp_degree);
  // Megatron-style TP: two allreduces of B*L*H elements per layer in each
  // direction, over the intra-node fabric.
  double tp_volume = p2p_activation_volume(micro_batch, model.seq_length, model.hidden_size,
                                           model.bytes_per_element);
  double tp_sync =
      2.0 * collective_time(tp_volume, tp_degree, intra_link, CollectiveKind::AllReduce);
  cost.fwd_s = fwd_compute + tp_sync;
  cost.bwd_s = fwd_compute * group.bwd_fwd_ratio + tp_sync;
  cost.activation_bytes_per_microbatch =
      static_cast<double>(micro_batch) * static_cast<double>(model.seq_length) *
      static_cast<double>(model.hidden_size) * model.activation_bytes_per_token_per_hidden;
  cost.param_bytes = 12.0 * static_cast<double>(model.hidden_size) *
                     static_cast<double>(model.hidden_size) * model.bytes_per_element;
  return cost;
}

}  // namespace hetplan
