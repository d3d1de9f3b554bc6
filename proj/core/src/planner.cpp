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
#include "hetplan/planner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "hetplan/errors.hpp"

namespace hetplan {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<int> split_layers(int total_layers, const std::vector<double>& weights) {
  const int parts = static_cast<int>(weights.size());
  if (parts < 1) throw InfeasibleError("split_layers: at least one stage required");
  if (total_layers < parts)
    throw InfeasibleError("split_layers: " + std::to_string(total_layers) +
                          " layers cannot fill " + std::to_string(parts) + " stages");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w > 0)) throw ConfigError("split_layers: weights must be positive");
    weight_sum += w;
  }

  std::vector<int> counts(parts);
  std::vector<double> fraction(parts);
  int assigned = 0;
  for (int i = 0; i < parts; ++i) {
    double quota = total_layers * weights[i] / weight_sum;
    counts[i] = static_cast<int>(std::floor(quota));
    fraction[i] = quota - counts[i];
    assigned += counts[i];
  }

  // Remainder units go to the largest fractional parts, ties to the lowest
  // index.
  int remainder = total_layers - assigned;
  std::vector<int> order(parts);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fraction[a] > fraction[b]; });
  for (int r = 0; r < remainder; ++r) ++counts[order[r % parts]];

  // Every stage runs at least one layer; cover deficits from the largest
  // count (lowest index on ties).
  for (int i = 0; i < parts; ++i) {
    while (counts[i] == 0) {
      int donor = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                   counts.begin());
      --counts[donor];
      ++counts[i];
    }
  }
  return counts;
}

std::vector<double> stage_weights(const std::vector<StageBlock>& blocks,
                                  const ModelSpec& /*model*/) {
  // Layer requirements are uniform across a homogeneous transformer stack,
  // so stage load weights reduce to each block's effective throughput.
  std::vector<double> weights;
  double sum = 0.0;
  for (const StageBlock& b : blocks) {
    if (b.group == nullptr) throw ConfigError("stage_weights: null group");
    double effective = b.group->peak_tflops * b.group->compute_efficiency * b.tp_degree;
    if (!(effective > 0)) throw ConfigError("stage_weights: non-positive effective throughput");
    for (int s = 0; s < b.stage_count; ++s) {
      weights.push_back(effective);
      sum += effective;
    }
  }
  if (weights.empty()) throw ConfigError("stage_weights: no stages");
  for (double& w : weights) w /= sum;
  return weights;
}

std::vector<int> order_stages(const std::vector<StageBlock>& blocks, int pp,
                              const std::function<double(const std::vector<int>&)>& evaluator,
                              int beam_width) {
  int total = 0;
  for (const StageBlock& b : blocks) total += b.stage_count;
  if (total != pp) throw ConfigError("order_stages: blocks cover " + std::to_string(total) +
                                     " stages, pp is " + std::to_string(pp));
  std::vector<int> perm(blocks.size());
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<int> best = perm;
  double best_time = kInf;
  int evaluated = 0;
  do {
    double t = evaluator(perm);
    if (t < best_time) {  // strict: lexicographically first permutation keeps ties
      best_time = t;
      best = perm;
    }
    if (beam_width > 0 && ++evaluated >= beam_width) break;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

// ---- search machinery -----------------------------------------------------

long long contiguous_split_count(int layers, int parts) {
  // C(layers-1, parts-1), saturating well above any sane enumeration limit.
  constexpr long long kSaturate = 1LL << 40;
  if (parts < 1 || layers < parts) return 0;
  long long n = layers - 1;
  long long k = parts - 1;
  if (k > n - k) k = n - k;
  long long c = 1;
  for (long long i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > kSaturate) return kSaturate;
  }
  return c;
}

template <typename Fn>
void enumerate_splits(int remaining, int parts, std::vector<int>& cur, const Fn& fn) {
  if (parts == 1) {
    cur.push_back(remaining);
    fn(cur);
    cur.pop_back();
    return;
  }
  for (int c = 1; remaining - c >= parts - 1; ++c) {
    cur.push_back(c);
    enumerate_splits(remaining - c, parts - 1, cur, fn);
    cur.pop_back();
  }
}

struct TaskSpec {
  int pp = 0;
  std::vector<int> stages_per_group;  // indexed like cluster.groups
  std::vector<int> stage_group;       // per pipeline position, group index
};

struct BestCandidate {
  double time_s = kInf;
  int pp = 0;
  std::string encoding;
  ParallelPlan plan;
  PlanEvaluation eval;
};

// Argmin tie-break: time, then lowest pp, then plan encoding.
bool better_than(const BestCandidate& a, const BestCandidate& b) {
  if (a.time_s != b.time_s) return a.time_s < b.time_s;
  if (a.pp != b.pp) return a.pp < b.pp;
  return a.encoding < b.encoding;
}

struct TaskResult {
  std::optional<BestCandidate> best;
  std::vector<SearchLogEntry> log;
  long long simulated = 0;
  long long pruned = 0;
};

std::string encode_plan(const ParallelPlan& p) {
  std::ostringstream os;
  os << to_string(p.schedule) << '|' << p.micro_batches_per_dp_replica << '|'
     << p.micro_batch_size;
  for (const StageAssignment& s : p.stages)
    os << '|' << s.group << ':' << s.layer_range.begin << '-' << s.layer_range.end << ':'
       << s.nodes_used << ':' << s.tp_degree << ':' << s.dp_degree;
  return os.str();
}

std::vector<int> ascending_divisors(int n) {
  std::vector<int> d;
  for (int i = 1; i <= n; ++i)
    if (n % i == 0) d.push_back(i);
  return d;
}

class SearchContext {
 public:
  SearchContext(const ModelSpec& model, const ClusterSpec& cluster, const TrainConfig& cfg,
                const PlannerConfig& pcfg)
      : model_(model), cluster_(cluster), cfg_(cfg), pcfg_(pcfg) {}

  std::vector<TaskSpec> build_tasks() const;
  // `probe` evaluates only the cheapest data/tensor assignment with the two
  // seed splits, to bootstrap a global incumbent before the full pass.
  // `global_bound` is that incumbent; candidates whose compute lower bound
  // exceeds it cannot win and are skipped when time_bound_pruning is on.
  TaskResult run_task(const TaskSpec& task, double global_bound, bool probe) const;

 private:
  json task_descriptor(const TaskSpec& task) const;
  void leaf_splits(const TaskSpec& task, SearchNode& node, double global_bound, bool probe,
                   TaskResult& out) const;
  std::optional<double> evaluate_split(const TaskSpec& task, const SearchNode& node,
                                       const std::vector<int>& split, json descriptor,
                                       double global_bound, TaskResult& out) const;
  ParallelPlan make_plan(const TaskSpec& task, const SearchNode& node,
                         const std::vector<int>& split) const;

  const ModelSpec& model_;
  const ClusterSpec& cluster_;
  const TrainConfig& cfg_;
  const PlannerConfig& pcfg_;
};

std::vector<TaskSpec> SearchContext::build_tasks() const {
  const int n_groups = static_cast<int>(cluster_.groups.size());
  std::vector<TaskSpec> tasks;

  for (int pp : pcfg_.pipeline_degrees) {
    if (pp < 1 || pp > model_.num_layers) continue;  // reported as infeasible later

    // Stage counts per group (0 allowed; each stage needs >= 1 node).
    std::vector<std::vector<int>> compositions;
    std::vector<int> cur;
    auto recurse = [&](auto&& self, int g, int remaining) -> void {
      if (g == n_groups) {
        if (remaining == 0) compositions.push_back(cur);
        return;
      }
      int cap = std::min(remaining, cluster_.groups[g].node_count);
      for (int s = 0; s <= cap; ++s) {
        cur.push_back(s);
        self(self, g + 1, remaining - s);
        cur.pop_back();
      }
    };
    recurse(recurse, 0, pp);

    for (const std::vector<int>& comp : compositions) {
      // Pipeline positions, either contiguous per-group blocks permuted or
      // (opt-in) arbitrary interleavings; both enumerated lexicographically
      // and capped by the ordering beam.
      std::vector<std::vector<int>> layouts;
      if (pcfg_.allow_group_interleaving) {
        std::vector<int> labels;
        for (int g = 0; g < n_groups; ++g)
          labels.insert(labels.end(), comp[g], g);
        int seen = 0;
        do {
          layouts.push_back(labels);
          if (pcfg_.stage_order_beam_width > 0 && ++seen >= pcfg_.stage_order_beam_width) break;
        } while (std::next_permutation(labels.begin(), labels.end()));
      } else {
        std::vector<int> participating;
        for (int g = 0; g < n_groups; ++g)
          if (comp[g] > 0) participating.push_back(g);
        std::vector<int> perm(participating.size());
        std::iota(perm.begin(), perm.end(), 0);
        int seen = 0;
        do {
          std::vector<int> layout;
          for (int b : perm) {
            int g = participating[b];
            layout.insert(layout.end(), comp[g], g);
          }
          layouts.push_back(std::move(layout));
          if (pcfg_.stage_order_beam_width > 0 && ++seen >= pcfg_.stage_order_beam_width) break;
        } while (std::next_permutation(perm.begin(), perm.end()));
      }

      for (std::vector<int>& layout : layouts) {
        TaskSpec t;
        t.pp = pp;
        t.stages_per_group = comp;
        t.stage_group = std::move(layout);
        tasks.push_back(std::move(t));
      }
    }
  }
  return tasks;
}

json SearchContext::task_descriptor(const TaskSpec& task) const {
  json layout = json::array();
  for (int g : task.stage_group) layout.push_back(cluster_.groups[g].name);
  return json{{"pp", task.pp}, {"layout", layout}};
}

TaskResult SearchContext::run_task(const TaskSpec& task, double global_bound,
                                   bool probe) const {
  TaskResult out;
  const int n_groups = static_cast<int>(cluster_.groups.size());

  // Adjacent pipeline positions must be connected.
  for (std::size_t i = 0; i + 1 < task.stage_group.size(); ++i) {
    const std::string& a = cluster_.groups[task.stage_group[i]].name;
    const std::string& b = cluster_.groups[task.stage_group[i + 1]].name;
    if (a != b && cluster_.inter_group_link(a, b) == nullptr) {
      json d = task_descriptor(task);
      d["level"] = "pipeline";
      out.log.push_back({d.dump(), -1.0, "no heterogeneous link between '" + a + "' and '" + b + "'"});
      ++out.pruned;
      return out;
    }
  }

  SearchNode node;
  node.level = SearchNode::Level::Pipeline;
  node.pp = task.pp;
  node.stages_per_group = task.stages_per_group;
  node.bound = kInf;

  // Data level: common dp degree and micro-batch size; tensor level below
  // fixes per-group tp and with it the integral node allotment.
  long long dp_max = std::numeric_limits<long long>::max();
  for (int g = 0; g < n_groups; ++g) {
    if (task.stages_per_group[g] == 0) continue;
    const DeviceGroup& grp = cluster_.groups[g];
    long long nodes_per_stage = grp.node_count / task.stages_per_group[g];
    dp_max = std::min(dp_max, nodes_per_stage * grp.devices_per_node);
  }

  std::vector<std::vector<int>> tp_options(n_groups, {1});
  for (int g = 0; g < n_groups; ++g)
    if (task.stages_per_group[g] > 0)
      tp_options[g] = ascending_divisors(cluster_.groups[g].devices_per_node);

  // Descending dp: the largest degrees have the fewest micro-batches, so the
  // cheapest simulations land first and tighten the incumbent early.
  for (long long dp = dp_max; dp >= 1; --dp) {
    for (long long B : pcfg_.micro_batch_candidates) {
      if (cfg_.global_batch_size % (dp * B) != 0) continue;
      node.level = SearchNode::Level::Data;
      node.dp = static_cast<int>(dp);
      node.micro_batch_size = B;

      // Tensor level: odometer over per-group tp divisor lists.
      std::vector<std::size_t> idx(n_groups, 0);
      for (;;) {
        std::vector<int> tp(n_groups);
        for (int g = 0; g < n_groups; ++g) tp[g] = tp_options[g][idx[g]];

        bool allotment_ok = true;
        for (int g = 0; g < n_groups && allotment_ok; ++g) {
          if (task.stages_per_group[g] == 0) continue;
          const DeviceGroup& grp = cluster_.groups[g];
          long long devices = dp * tp[g];
          if (devices % grp.devices_per_node != 0) {
            allotment_ok = false;
            break;
          }
          long long nodes_used = devices / grp.devices_per_node;
          if (nodes_used < 1 ||
              nodes_used * task.stages_per_group[g] > grp.node_count)
            allotment_ok = false;
        }
        if (allotment_ok) {
          node.level = SearchNode::Level::Tensor;
          node.tp_per_group = tp;
          leaf_splits(task, node, global_bound, probe, out);
          if (out.best) node.bound = std::min(node.bound, out.best->time_s);
          if (probe && out.simulated > 0) return out;
        }

        int g = 0;
        while (g < n_groups && ++idx[g] == tp_options[g].size()) idx[g++] = 0;
        if (g == n_groups) break;
      }
    }
  }

  if (!probe && out.simulated == 0 && out.log.empty()) {
    json d = task_descriptor(task);
    d["level"] = "pipeline";
    out.log.push_back({d.dump(), -1.0, "no integral dp/tp/micro-batch assignment"});
    ++out.pruned;
  }
  return out;
}

void SearchContext::leaf_splits(const TaskSpec& task, SearchNode& node, double global_bound,
                                bool probe, TaskResult& out) const {
  const int pp = task.pp;
  const int L = model_.num_layers;

  json base = task_descriptor(task);
  base["dp"] = node.dp;
  base["micro_batch_size"] = node.micro_batch_size;
  json tp_desc = json::object();
  for (std::size_t g = 0; g < cluster_.groups.size(); ++g)
    if (task.stages_per_group[g] > 0)
      tp_desc[cluster_.groups[g].name] = node.tp_per_group[g];
  base["tp"] = tp_desc;

  if (L < pp) {
    base["level"] = "pipeline";
    out.log.push_back({base.dump(), -1.0, "more stages than layers"});
    ++out.pruned;
    return;
  }

  std::map<std::vector<int>, std::optional<double>> tried;
  auto try_split = [&](const std::vector<int>& split) -> std::optional<double> {
    auto it = tried.find(split);
    if (it != tried.end()) return it->second;
    std::optional<double> t = evaluate_split(task, node, split, base, global_bound, out);
    tried.emplace(split, t);
    return t;
  };

  // Uniform split is always a candidate, so the search can never lose to it.
  std::vector<int> uniform = split_layers(L, std::vector<double>(pp, 1.0));
  try_split(uniform);
  if (pcfg_.uniform_split_only) return;

  // Load-balanced apportionment: capable stages take more layers.
  std::vector<StageBlock> blocks;
  for (std::size_t i = 0; i < task.stage_group.size(); ++i) {
    int g = task.stage_group[i];
    if (!blocks.empty() && blocks.back().group == &cluster_.groups[g]) {
      ++blocks.back().stage_count;
    } else {
      blocks.push_back({&cluster_.groups[g], 1, node.tp_per_group[g]});
    }
  }
  std::vector<double> weights = stage_weights(blocks, model_);
  std::vector<int> proportional = split_layers(L, weights);
  try_split(proportional);
  if (probe) return;  // seed candidates only

  if (contiguous_split_count(L, pp) <= pcfg_.exhaustive_split_limit) {
    // Small instance: the full contiguous-split space is affordable.
    std::vector<int> cur;
    enumerate_splits(L, pp, cur, [&](const std::vector<int>& split) { try_split(split); });
    return;
  }

  // Large instance: steepest-descent over single-layer transfers between
  // adjacent stages, starting from the proportional split.
  std::vector<int> current = proportional;
  std::optional<double> current_time = try_split(current);
  if (!current_time) {  // proportional split infeasible; restart from uniform
    current = uniform;
    current_time = try_split(current);
  }
  int max_steps = 4 * L;
  for (int step = 0; step < max_steps && current_time; ++step) {
    std::optional<double> best_neighbor_time;
    std::vector<int> best_neighbor;
    for (int i = 0; i + 1 < pp; ++i) {
      for (int d : {+1, -1}) {
        std::vector<int> neighbor = current;
        neighbor[i] += d;
        neighbor[i + 1] -= d;
        if (neighbor[i] < 1 || neighbor[i + 1] < 1) continue;
        std::optional<double> t = try_split(neighbor);
        if (t && (!best_neighbor_time || *t < *best_neighbor_time)) {
          best_neighbor_time = t;
          best_neighbor = neighbor;
        }
      }
    }
    if (!best_neighbor_time || *best_neighbor_time >= *current_time) break;
    current = best_neighbor;
    current_time = best_neighbor_time;
  }
}

std::optional<double> SearchContext::evaluate_split(const TaskSpec& task, const SearchNode& node,
                                                    const std::vector<int>& split,
                                                    json descriptor, double global_bound,
                                                    TaskResult& out) const {
  descriptor["split"] = split;
  ParallelPlan plan = make_plan(task, node, split);

  // Memory feasibility first: retained activations are known analytically
  // per schedule, no simulation needed.
  const int P = plan.stage_count();
  for (int i = 0; i < P; ++i) {
    int in_flight = plan.schedule == Schedule::GPipe
                        ? static_cast<int>(plan.micro_batches_per_dp_replica)
                        : one_f_one_b_in_flight(i, P, plan.micro_batches_per_dp_replica);
    double need = stage_memory(plan.stages[i], model_, cfg_, plan, in_flight);
    const DeviceGroup* g = cluster_.find_group(plan.stages[i].group);
    double budget = g->memory_bytes * pcfg_.memory_headroom;
    if (need > budget) {
      std::ostringstream reason;
      reason << "stage " << i << " memory " << need << " B exceeds " << budget << " B ("
             << g->name << " x headroom)";
      out.log.push_back({descriptor.dump(), -1.0, reason.str()});
      ++out.pruned;
      return std::nullopt;
    }
  }

  double incumbent = std::min(global_bound, out.best ? out.best->time_s : kInf);
  if (pcfg_.time_bound_pruning && incumbent < kInf) {
    // Admissible bound: every stage must run M forwards and backwards
    // serially. Skipping only on a strict excess cannot drop the optimum or
    // any candidate that could still win a tie.
    PlanCosts costs = plan_stage_times(plan, model_, cluster_, cfg_);
    double lower = 0.0;
    for (int i = 0; i < P; ++i)
      lower = std::max(lower, plan.micro_batches_per_dp_replica *
                                  (costs.times[i].fwd_s + costs.times[i].bwd_s));
    if (lower > incumbent) {
      out.log.push_back({descriptor.dump(), -1.0, "compute lower bound above incumbent"});
      ++out.pruned;
      return std::nullopt;
    }
  }

  PlanEvaluation eval;
  try {
    eval = evaluate_plan_unchecked(plan, model_, cluster_, cfg_, /*record_trace=*/false);
  } catch (const PlanError& e) {
    out.log.push_back({descriptor.dump(), -1.0, e.what()});
    ++out.pruned;
    return std::nullopt;
  }
  double t = eval.sim.iteration_time_s;
  out.log.push_back({descriptor.dump(), t, ""});
  ++out.simulated;

  BestCandidate cand{t, task.pp, encode_plan(plan), std::move(plan), std::move(eval)};
  if (!out.best || better_than(cand, *out.best)) out.best = std::move(cand);
  return t;
}

ParallelPlan SearchContext::make_plan(const TaskSpec& task, const SearchNode& node,
                                      const std::vector<int>& split) const {
  ParallelPlan plan;
  plan.schedule = pcfg_.schedule;
  plan.micro_batch_size = node.micro_batch_size;
  plan.micro_batches_per_dp_replica =
      cfg_.global_batch_size / (static_cast<long long>(node.dp) * node.micro_batch_size);
  int begin = 0;
  for (std::size_t i = 0; i < task.stage_group.size(); ++i) {
    int g = task.stage_group[i];
    const DeviceGroup& grp = cluster_.groups[g];
    StageAssignment s;
    s.layer_range = {begin, begin + split[i]};
    begin += split[i];
    s.group = grp.name;
    s.tp_degree = node.tp_per_group[g];
    s.dp_degree = node.dp;
    s.nodes_used = static_cast<int>(static_cast<long long>(node.dp) * s.tp_degree /
                                    grp.devices_per_node);
    plan.stages.push_back(std::move(s));
  }
  return plan;
}

}  // namespace

SearchOutcome search(const ModelSpec& model, const ClusterSpec& cluster, const TrainConfig& cfg,
                     const PlannerConfig& pcfg_in, int jobs) {
  validate_spec(model);
  validate_spec(cluster);
  validate_spec(cfg);

  PlannerConfig pcfg = pcfg_in;
  if (pcfg.pipeline_degrees.empty()) {
    int cap = std::min(model.num_layers, cluster.total_nodes());
    for (int pp = 1; pp <= cap; ++pp) pcfg.pipeline_degrees.push_back(pp);
  }
  std::sort(pcfg.pipeline_degrees.begin(), pcfg.pipeline_degrees.end());
  pcfg.pipeline_degrees.erase(
      std::unique(pcfg.pipeline_degrees.begin(), pcfg.pipeline_degrees.end()),
      pcfg.pipeline_degrees.end());
  if (pcfg.micro_batch_candidates.empty())
    pcfg.micro_batch_candidates.push_back(cfg.micro_batch_size);
  std::sort(pcfg.micro_batch_candidates.begin(), pcfg.micro_batch_candidates.end());
  pcfg.micro_batch_candidates.erase(
      std::unique(pcfg.micro_batch_candidates.begin(), pcfg.micro_batch_candidates.end()),
      pcfg.micro_batch_candidates.end());
  for (int pp : pcfg.pipeline_degrees)
    if (pp < 1) throw ConfigError("planner: pipeline degrees must be >= 1");
  for (long long b : pcfg.micro_batch_candidates)
    if (b < 1) throw ConfigError("planner: micro-batch candidates must be >= 1");
  if (!(pcfg.memory_headroom > 0) || pcfg.memory_headroom > 1)
    throw ConfigError("planner: memory_headroom must be in (0, 1]");
  if (pcfg.stage_order_beam_width < 0)
    throw ConfigError("planner: stage_order_beam_width must be >= 0");

  SearchContext ctx(model, cluster, cfg, pcfg);
  std::vector<TaskSpec> tasks = ctx.build_tasks();

  jobs = std::max(1, jobs);
  auto run_all = [&](auto&& fn) {
    std::vector<std::exception_ptr> errors(tasks.size());
    if (jobs == 1 || tasks.size() <= 1) {
      for (std::size_t i = 0; i < tasks.size(); ++i) fn(i);
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
      pool.reserve(n);
      for (int i = 0; i < n; ++i) pool.emplace_back(worker);
      for (std::thread& th : pool) th.join();
      for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    }
  };

  // Probe pass: one cheap candidate per subtree seeds the bound the full
  // pass prunes against. The bound is a plain min over probe results, so it
  // is identical for any job count.
  double global_bound = kInf;
  if (pcfg.time_bound_pruning) {
    std::vector<double> probe_times(tasks.size(), kInf);
    run_all([&](std::size_t i) {
      TaskResult probe = ctx.run_task(tasks[i], kInf, /*probe=*/true);
      if (probe.best) probe_times[i] = probe.best->time_s;
    });
    for (double t : probe_times) global_bound = std::min(global_bound, t);
  }

  std::vector<TaskResult> results(tasks.size());
  run_all([&](std::size_t i) { results[i] = ctx.run_task(tasks[i], global_bound, false); });

  // Deterministic reduction in task order, independent of thread timing.
  SearchOutcome outcome;
  std::optional<BestCandidate> best;
  for (TaskResult& r : results) {
    outcome.candidates_simulated += r.simulated;
    outcome.candidates_pruned += r.pruned;
    for (SearchLogEntry& e : r.log) outcome.log.push_back(std::move(e));
    if (r.best && (!best || better_than(*r.best, *best))) best = std::move(r.best);
  }

  if (!best) {
    std::vector<std::string> reasons;
    std::set<std::string> seen;
    for (const SearchLogEntry& e : outcome.log) {
      if (e.prune_reason.empty()) continue;
      std::string line = e.candidate + " -> " + e.prune_reason;
      if (seen.insert(line).second && reasons.size() < 200) reasons.push_back(line);
    }
    if (tasks.empty())
      reasons.push_back(
          "no usable pipeline degree: candidates must lie in [1, num_layers] and fit the "
          "cluster's node counts");
    throw InfeasibleError("no feasible plan found", std::move(reasons));
  }

  outcome.plan = std::move(best->plan);
  // The inner loop simulates without traces; give the winner a full one.
  outcome.eval = evaluate_plan_unchecked(outcome.plan, model, cluster, cfg);
  return outcome;
}

}  // namespace hetplan
