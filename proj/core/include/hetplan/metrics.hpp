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
#ifndef HETPLAN_METRICS_HPP_
#define HETPLAN_METRICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "hetplan/evaluate.hpp"
#include "hetplan/types.hpp"

namespace hetplan {

// Tokens per accelerator per second: L*G/(S*T).
double tgs(long long seq_length, long long global_batch, long long accelerators,
           double iteration_time_s);

// 100 * achieved/peak. For heterogeneous clusters pass the count-weighted
// average peak (theoretical_upper_bound).
double mfu(double tested_tflops, double peak_tflops);

// Count-weighted mean of per-type values: sum(v_i*c_i)/sum(c_i).
double theoretical_upper_bound(const std::vector<double>& values,
                               const std::vector<long long>& counts);

// 100 * (baseline - candidate) / baseline; positive when candidate is faster.
double improvement_pct(double baseline_s, double candidate_s);

// Round half-even to two decimals, the report rendering precision.
double round2(double x);

// Model FLOPs (fwd+bwd) per token, from the same per-layer estimate the
// cost model times with.
double model_flops_per_token(const ModelSpec& model);

// Zero-bubble, zero-communication throughput ceiling of one accelerator
// type: effective FLOPS / FLOPs-per-token.
double ideal_tgs_per_accelerator(const ModelSpec& model, const DeviceGroup& group);

struct GroupMetrics {
  std::string name;
  long long devices = 0;          // devices the plan uses in this group
  double achieved_tflops = 0.0;   // per accelerator
  double ideal_tgs = 0.0;         // homogeneous upper bound
};

struct MetricsReport {
  double iteration_time_s = 0.0;
  double tgs = 0.0;
  std::vector<GroupMetrics> per_group;
  double achieved_tflops = 0.0;        // per accelerator, cluster-wide
  double peak_tflops_weighted = 0.0;   // count-weighted heterogeneous peak
  double mfu_pct = 0.0;
  double theoretical_upper_bound = 0.0;  // count-weighted ideal TGS
  double pct_of_theoretical = 0.0;
  std::optional<double> improvement_pct;  // vs a baseline plan, when given
};

// Derives all evaluation metrics from a simulated plan. Achieved TFLOPS
// comes from total model FLOPs per iteration over S*T, so TGS and MFU stay
// internally consistent.
MetricsReport build_metrics(const ParallelPlan& plan, const ModelSpec& model,
                            const ClusterSpec& cluster, const TrainConfig& cfg,
                            const PlanEvaluation& eval);

// Fixed-width per-stage table plus the headline metrics, for terminals.
std::string render_text_report(const ParallelPlan& plan, const MetricsReport& metrics,
                               const PlanEvaluation& eval);

}  // namespace hetplan

#endif  // HETPLAN_METRICS_HPP_
