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
#include "hetplan/sim.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace hetplan {

namespace {

struct Op {
  EventKind kind;  // F or B
  int microbatch;
};

int kind_rank(EventKind k) {
  switch (k) {
    case EventKind::F: return 0;
    case EventKind::B: return 1;
    case EventKind::SendF: return 2;
    case EventKind::SendB: return 3;
  }
  return 4;
}

// Compute-op order for one stage. 1F1B: min(P-i, M) warm-up forwards, then
// strict backward/forward alternation until both runs are exhausted. GPipe:
// all forwards, then all backwards.
std::vector<Op> stage_ops(Schedule schedule, int stage, int stage_count, int micro_batches) {
  std::vector<Op> ops;
  ops.reserve(2 * micro_batches);
  if (schedule == Schedule::GPipe) {
    for (int m = 0; m < micro_batches; ++m) ops.push_back({EventKind::F, m});
    for (int m = 0; m < micro_batches; ++m) ops.push_back({EventKind::B, m});
    return ops;
  }
  int warmup = one_f_one_b_in_flight(stage, stage_count, micro_batches);
  for (int m = 0; m < warmup; ++m) ops.push_back({EventKind::F, m});
  int next_fwd = warmup;
  for (int m = 0; m < micro_batches; ++m) {
    ops.push_back({EventKind::B, m});
    if (next_fwd < micro_batches) ops.push_back({EventKind::F, next_fwd++});
  }
  return ops;
}

}  // namespace

SimResult simulate(Schedule schedule, const std::vector<StageTimes>& times,
                   long long micro_batches, bool record_trace) {
  const int P = static_cast<int>(times.size());
  if (P < 1) throw std::invalid_argument("simulate: at least one stage required");
  if (micro_batches < 1) throw std::invalid_argument("simulate: micro_batches must be >= 1");
  if (micro_batches > 5'000'000) throw std::invalid_argument("simulate: micro_batches too large");
  const int M = static_cast<int>(micro_batches);
  for (const StageTimes& t : times) {
    if (t.fwd_s < 0 || t.bwd_s < 0 || t.send_fwd_s < 0 || t.send_bwd_s < 0)
      throw std::invalid_argument("simulate: negative stage times rejected");
  }

  constexpr double kUnscheduled = -1.0;
  auto grid = [&](int value_count) {
    return std::vector<std::vector<double>>(P, std::vector<double>(value_count, kUnscheduled));
  };
  std::vector<std::vector<double>> fwd_end = grid(M);
  std::vector<std::vector<double>> bwd_end = grid(M);
  std::vector<std::vector<double>> sendf_end = grid(M);  // hop stage i -> i+1
  std::vector<std::vector<double>> sendb_end = grid(M);  // hop stage i -> i-1
  std::vector<double> stage_free(P, 0.0);
  std::vector<double> chan_fwd_free(P, 0.0);
  std::vector<double> chan_bwd_free(P, 0.0);

  std::vector<std::vector<Op>> ops(P);
  std::vector<std::size_t> next(P, 0);
  std::size_t total_ops = 0;
  for (int i = 0; i < P; ++i) {
    ops[i] = stage_ops(schedule, i, P, M);
    total_ops += ops[i].size();
  }

  SimResult result;
  result.per_stage_busy_s.assign(P, 0.0);
  if (record_trace)
    result.trace.reserve(total_ops + 2 * static_cast<std::size_t>(std::max(0, P - 1)) * M);
  double max_end = 0.0;

  auto ready = [&](int i, const Op& op) {
    if (op.kind == EventKind::F) return i == 0 || sendf_end[i - 1][op.microbatch] >= 0;
    return i == P - 1 || sendb_end[i + 1][op.microbatch] >= 0;
  };

  auto run = [&](int i, const Op& op) {
    double data_ready = 0.0;
    double duration = 0.0;
    if (op.kind == EventKind::F) {
      if (i > 0) data_ready = sendf_end[i - 1][op.microbatch];
      duration = times[i].fwd_s;
    } else {
      if (i < P - 1) data_ready = sendb_end[i + 1][op.microbatch];
      duration = times[i].bwd_s;
    }
    double start = std::max(stage_free[i], data_ready);
    double end = start + duration;
    stage_free[i] = end;
    max_end = std::max(max_end, end);
    result.per_stage_busy_s[i] += duration;
    if (record_trace) result.trace.push_back({i, op.kind, op.microbatch, start, end});

    // The produced tensor leaves on the directed link's channel immediately;
    // transfers on one channel serialize, but do not occupy the stage.
    if (op.kind == EventKind::F) {
      fwd_end[i][op.microbatch] = end;
      if (i < P - 1) {
        double s = std::max(end, chan_fwd_free[i]);
        double e = s + times[i].send_fwd_s;
        chan_fwd_free[i] = e;
        sendf_end[i][op.microbatch] = e;
        max_end = std::max(max_end, e);
        if (record_trace) result.trace.push_back({i, EventKind::SendF, op.microbatch, s, e});
      }
    } else {
      bwd_end[i][op.microbatch] = end;
      if (i > 0) {
        double s = std::max(end, chan_bwd_free[i]);
        double e = s + times[i].send_bwd_s;
        chan_bwd_free[i] = e;
        sendb_end[i][op.microbatch] = e;
        max_end = std::max(max_end, e);
        if (record_trace) result.trace.push_back({i, EventKind::SendB, op.microbatch, s, e});
      }
    }
  };

  std::size_t done = 0;
  while (done < total_ops) {
    bool progressed = false;
    for (int i = 0; i < P; ++i) {
      while (next[i] < ops[i].size() && ready(i, ops[i][next[i]])) {
        run(i, ops[i][next[i]]);
        ++next[i];
        ++done;
        progressed = true;
      }
    }
    if (!progressed) throw std::logic_error("simulate: schedule deadlocked");
  }

  // Deterministic trace order: (time, stage, F < B < sends, microbatch).
  auto event_key = [](const TraceEvent& e) {
    return std::make_tuple(e.start_s, e.stage, kind_rank(e.kind), e.microbatch);
  };
  std::sort(result.trace.begin(), result.trace.end(),
            [&](const TraceEvent& a, const TraceEvent& b) { return event_key(a) < event_key(b); });

  result.iteration_time_s = max_end;
  result.per_stage_compute_end_s = stage_free;

  // Retained activations: +1 when a forward starts, -1 when the matching
  // backward ends; at equal instants the release applies first.
  result.peak_in_flight.assign(P, 0);
  for (int i = 0; i < P; ++i) {
    std::vector<std::pair<double, int>> deltas;
    deltas.reserve(2 * M);
    for (int m = 0; m < M; ++m) {
      deltas.emplace_back(fwd_end[i][m] - times[i].fwd_s, +1);  // forward start
      deltas.emplace_back(bwd_end[i][m], -1);
    }
    std::sort(deltas.begin(), deltas.end());
    int held = 0, peak = 0;
    for (const auto& [t, d] : deltas) {
      held += d;
      peak = std::max(peak, held);
    }
    result.peak_in_flight[i] = peak;
  }

  BubbleRatios ratios = bubble_ratio(result);
  result.per_stage_bubble_ratio = std::move(ratios.per_stage);
  result.aggregate_bubble_ratio = ratios.aggregate;
  return result;
}

BubbleRatios bubble_ratio(const SimResult& result) {
  BubbleRatios ratios;
  const std::size_t P = result.per_stage_busy_s.size();
  ratios.per_stage.assign(P, 0.0);
  if (result.iteration_time_s <= 0.0) return ratios;
  double busy_sum = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    ratios.per_stage[i] = 1.0 - result.per_stage_busy_s[i] / result.iteration_time_s;
    busy_sum += result.per_stage_busy_s[i];
  }
  ratios.aggregate = 1.0 - busy_sum / (static_cast<double>(P) * result.iteration_time_s);
  return ratios;
}

}  // namespace hetplan
