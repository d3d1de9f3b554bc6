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
#include "hetplan/metrics.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hetplan/cost_model.hpp"

namespace hetplan {

double tgs(long long seq_length, long long global_batch, long long accelerators,
           double iteration_time_s) {
  if (accelerators <= 0) throw std::domain_error("tgs: accelerator count must be > 0");
  if (iteration_time_s <= 0) throw std::domain_error("tgs: iteration time must be > 0");
  return static_cast<double>(seq_length) * static_cast<double>(global_batch) /
         (static_cast<double>(accelerators) * iteration_time_s);
}

double mfu(double tested_tflops, double peak_tflops) {
  if (peak_tflops <= 0) throw std::domain_error("mfu: peak must be > 0");
  return 100.0 * tested_tflops / peak_tflops;
}

double theoretical_upper_bound(const std::vector<double>& values,
                               const std::vector<long long>& counts) {
  if (values.empty() || values.size() != counts.size())
    throw std::domain_error("theoretical_upper_bound: need equal-length non-empty lists");
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (counts[i] <= 0) throw std::domain_error("theoretical_upper_bound: counts must be > 0");
    weighted += values[i] * static_cast<double>(counts[i]);
    total += static_cast<double>(counts[i]);
  }
  return weighted / total;
}

double improvement_pct(double baseline_s, double candidate_s) {
  if (baseline_s <= 0) throw std::domain_error("improvement_pct: baseline must be > 0");
  return 100.0 * (baseline_s - candidate_s) / baseline_s;
}

double round2(double x) {
  // Banker's rounding at two decimals, the paper's presentation precision.
  return std::nearbyint(x * 100.0) / 100.0;
}

double model_flops_per_token(const ModelSpec& model) {
  // fwd + bwd = 3x forward under the 2x backward convention.
  double per_layer_per_token =
      24.0 * static_cast<double>(model.hidden_size) * static_cast<double>(model.hidden_size) +
      4.0 * static_cast<double>(model.seq_length) * static_cast<double>(model.hidden_size);
  return 3.0 * model.num_layers * per_layer_per_token;
}

double ideal_tgs_per_accelerator(const ModelSpec& model, const DeviceGroup& group) {
  return group.peak_tflops * group.compute_efficiency * 1e12 / model_flops_per_token(model);
}

MetricsReport build_metrics(const ParallelPlan& plan, const ModelSpec& model,
                            const ClusterSpec& cluster, const TrainConfig& cfg,
                            const PlanEvaluation& eval) {
  MetricsReport report;
  report.iteration_time_s = eval.sim.iteration_time_s;
  const long long S = eval.total_devices;
  report.tgs = tgs(model.seq_length, cfg.global_batch_size, S, eval.sim.iteration_time_s);

  // Achieved TFLOPS from the same FLOPs estimate the cost model times with,
  // so TGS and MFU stay consistent: total model FLOPs / (S * T).
  double tokens_per_iter = static_cast<double>(model.seq_length) *
                           static_cast<double>(cfg.global_batch_size);
  double total_flops = model_flops_per_token(model) * tokens_per_iter;
  report.achieved_tflops =
      total_flops / (static_cast<double>(S) * eval.sim.iteration_time_s) / 1e12;

  // Per-group accounting: FLOPs executed by a group's stages over its
  // devices. DP replicas of a stage split the global batch, so stage FLOPs
  // total G * L tokens through the stage's layers.
  std::map<std::string, long long> devices_by_group;
  std::map<std::string, double> flops_by_group;
  double flops_per_layer_token = model_flops_per_token(model) / model.num_layers;
  for (const StageAssignment& s : plan.stages) {
    devices_by_group[s.group] += static_cast<long long>(s.dp_degree) * s.tp_degree;
    flops_by_group[s.group] +=
        s.layer_range.count() * flops_per_layer_token * tokens_per_iter;
  }
  std::vector<double> ideal_values;
  std::vector<long long> ideal_counts;
  double weighted_peak = 0.0;
  for (const DeviceGroup& g : cluster.groups) {
    auto it = devices_by_group.find(g.name);
    if (it == devices_by_group.end()) continue;
    GroupMetrics gm;
    gm.name = g.name;
    gm.devices = it->second;
    gm.achieved_tflops = flops_by_group[g.name] /
                         (static_cast<double>(gm.devices) * eval.sim.iteration_time_s) / 1e12;
    gm.ideal_tgs = ideal_tgs_per_accelerator(model, g);
    ideal_values.push_back(gm.ideal_tgs);
    ideal_counts.push_back(gm.devices);
    weighted_peak += g.peak_tflops * static_cast<double>(gm.devices);
    report.per_group.push_back(std::move(gm));
  }
  report.peak_tflops_weighted = weighted_peak / static_cast<double>(S);
  report.mfu_pct = mfu(report.achieved_tflops, report.peak_tflops_weighted);
  report.theoretical_upper_bound = theoretical_upper_bound(ideal_values, ideal_counts);
  report.pct_of_theoretical = 100.0 * report.tgs / report.theoretical_upper_bound;
  return report;
}

std::string render_text_report(const ParallelPlan& plan, const MetricsReport& metrics,
                               const PlanEvaluation& eval) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "iteration time  %.6f s   TGS %.2f tok/acc/s   MFU %.2f%%\n",
                metrics.iteration_time_s, round2(metrics.tgs), round2(metrics.mfu_pct));
  os << line;
  std::snprintf(line, sizeof(line),
                "theoretical TGS %.2f   pct of theoretical %.2f%%   bubble %.2f%%\n",
                round2(metrics.theoretical_upper_bound), round2(metrics.pct_of_theoretical),
                round2(100.0 * eval.sim.aggregate_bubble_ratio));
  os << line;
  if (metrics.improvement_pct) {
    std::snprintf(line, sizeof(line), "improvement over baseline %.2f%%\n",
                  round2(*metrics.improvement_pct));
    os << line;
  }
  os << "stage  group            layers  dp  tp  fwd_ms   bwd_ms   bubble%  mem_GiB\n";
  for (int i = 0; i < plan.stage_count(); ++i) {
    const StageAssignment& s = plan.stages[i];
    std::snprintf(line, sizeof(line), "%5d  %-15s  %6d  %2d  %2d  %7.3f  %7.3f  %7.2f  %7.2f\n",
                  i, s.group.c_str(), s.layer_range.count(), s.dp_degree, s.tp_degree,
                  eval.costs.times[i].fwd_s * 1e3, eval.costs.times[i].bwd_s * 1e3,
                  100.0 * eval.sim.per_stage_bubble_ratio[i],
                  eval.sim.peak_memory_bytes[i] / (1024.0 * 1024.0 * 1024.0));
    os << line;
  }
  return os.str();
}

}  // namespace hetplan
