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

// Acceptance suite: one test case per release criterion, each printing a
// single PASS line on success. Values quoted from the evaluation write-up
// are frozen here; everything else is checked against independent oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "hetplan/json_io.hpp"
#include "hetplan/metrics.hpp"
#include "hetplan/planner.hpp"
#include "hetplan/profile.hpp"
#include "test_util.hpp"

using namespace hetplan;
using namespace hetplan::testutil;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

void pass(int criterion, const char* what) {
  std::printf("[acceptance] criterion %d PASS: %s\n", criterion, what);
  std::fflush(stdout);
}

double oracle_exhaustive(const ModelSpec& model, const ClusterSpec& cluster,
                         const TrainConfig& cfg, int pp) {
  // Independent exhaustive enumeration: contiguous splits x block orderings,
  // single-node stages.
  std::vector<std::vector<std::string>> layouts;
  int a_nodes = cluster.groups[0].node_count;
  int b_nodes = cluster.groups.size() > 1 ? cluster.groups[1].node_count : 0;
  REQUIRE(a_nodes + b_nodes == pp);
  {
    std::vector<std::string> ab;
    ab.insert(ab.end(), a_nodes, cluster.groups[0].name);
    if (b_nodes > 0) ab.insert(ab.end(), b_nodes, cluster.groups[1].name);
    layouts.push_back(ab);
    if (a_nodes > 0 && b_nodes > 0) {
      std::vector<std::string> ba;
      ba.insert(ba.end(), b_nodes, cluster.groups[1].name);
      ba.insert(ba.end(), a_nodes, cluster.groups[0].name);
      layouts.push_back(ba);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> split;
  auto recurse = [&](auto&& self, int remaining, int parts) -> void {
    if (parts == 1) {
      split.push_back(remaining);
      for (const auto& layout : layouts) {
        ParallelPlan plan = single_node_plan(split, layout, cfg.global_batch_size);
        best = std::min(best,
                        evaluate_plan_unchecked(plan, model, cluster, cfg).sim.iteration_time_s);
      }
      split.pop_back();
      return;
    }
    for (int c = 1; remaining - c >= parts - 1; ++c) {
      split.push_back(c);
      self(self, remaining - c, parts - 1);
      split.pop_back();
    }
  };
  recurse(recurse, model.num_layers, pp);
  return best;
}

std::vector<int> apportion_oracle(int total, const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<int> out(n);
  std::vector<std::pair<double, int>> frac;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    double q = total * weights[i] / sum;
    out[i] = static_cast<int>(q);
    used += out[i];
    frac.push_back({-(q - out[i]), i});
  }
  std::sort(frac.begin(), frac.end());
  for (int r = 0; r < total - used; ++r) ++out[frac[r % n].second];
  for (int i = 0; i < n; ++i) {
    while (out[i] == 0) {
      int donor = 0;
      for (int j = 1; j < n; ++j)
        if (out[j] > out[donor]) donor = j;
      --out[donor];
      ++out[i];
    }
  }
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("hetplan_acc_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name, const std::string& contents) const {
    std::string p = (path / name).string();
    write_file(p, contents);
    return p;
  }
};

}  // namespace

TEST_CASE("criterion 1: metric arithmetic reproduction") {
  CHECK(round2(theoretical_upper_bound({56.4, 45.3}, {1, 1})) == Approx(50.85).epsilon(1e-12));
  CHECK(round2(theoretical_upper_bound({38.9, 28.8}, {1, 1})) == Approx(33.85).epsilon(1e-12));
  CHECK(round2(theoretical_upper_bound({38.9, 35.3}, {1, 5})) == Approx(35.90).epsilon(1e-12));
  CHECK(std::abs(improvement_pct(507.3, 412.49) - 18.69) <= 0.01);
  double weighted = theoretical_upper_bound({93.81, 48.08}, {1, 5});
  CHECK(std::abs(mfu(51.11, weighted) - 91.75) <= 0.02);
  pass(1, "upper bounds 50.85/33.85/35.90, improvement 18.69%, MFU 91.75%");
}

TEST_CASE("criterion 2: simulator equals the closed form on the uniform grid") {
  const double f = 1.25, b = 2.5;
  for (int P = 1; P <= 8; ++P) {
    for (int M = 1; M <= 16; ++M) {
      SimResult r1 = simulate(Schedule::OneFOneB, uniform_times(P, f, b), M);
      REQUIRE_MESSAGE(r1.iteration_time_s == Approx((M + P - 1) * (f + b)).epsilon(1e-12),
                      "1F1B P=" << P << " M=" << M);
      SimResult rg = simulate(Schedule::GPipe, uniform_times(P, f, b), M);
      for (int i = 0; i < P; ++i) {
        REQUIRE(rg.peak_in_flight[i] == M);
        REQUIRE(r1.peak_in_flight[i] == std::min<long long>(M, P - i));
      }
    }
  }
  pass(2, "1F1B == (M+P-1)(f+b) and in-flight bounds for P in [1,8], M in [1,16]");
}

TEST_CASE("criterion 3: planner equals exhaustive enumeration on small instances") {
  int instances = 0;
  auto run_instance = [&](const ModelSpec& model, const ClusterSpec& cluster, int pp,
                          const char* tag) {
    TrainConfig cfg = train_config(4);
    PlannerConfig pcfg;
    pcfg.pipeline_degrees = {pp};
    pcfg.memory_headroom = 1.0;
    SearchOutcome got = search(model, cluster, cfg, pcfg);
    double oracle = oracle_exhaustive(model, cluster, cfg, pp);
    REQUIRE_MESSAGE(got.eval.sim.iteration_time_s == oracle,
                    tag << " layers=" << model.num_layers << " pp=" << pp);
    ++instances;
  };

  for (int layers : {4, 6, 8, 10, 12}) {
    for (int pp : {2, 3, 4}) {
      if (pp > layers) continue;
      // Single homogeneous group.
      run_instance(tiny_model(layers), one_group_cluster(pp), pp, "1-group");
      // Two groups at each speed ratio, with effectively-zero and real comm.
      for (double ratio : {1.0, 2.0, 3.0}) {
        for (double bandwidth : {1e15, 2e9}) {
          int fast_nodes = pp / 2;
          int slow_nodes = pp - fast_nodes;
          run_instance(tiny_model(layers),
                       two_group_cluster(fast_nodes, slow_nodes, ratio, bandwidth), pp,
                       "2-group");
        }
      }
    }
  }
  std::ostringstream msg;
  msg << "search == exhaustive optimum on " << instances << " instances";
  pass(3, msg.str().c_str());
}

TEST_CASE("criterion 4: non-uniform dominance across randomized instances") {
  std::mt19937 rng(20260810);
  std::uniform_real_distribution<double> ratio_dist(1.2, 3.0);
  int strict = 0;
  const int kInstances = 100;
  for (int i = 0; i < kInstances; ++i) {
    int pp = std::vector<int>{2, 4, 6}[i % 3];
    int layers = 24 + 6 * (i % 3);
    double ratio = ratio_dist(rng);
    ModelSpec model = tiny_model(layers);
    ClusterSpec cluster = two_group_cluster(pp / 2, pp - pp / 2, ratio, 5e9);
    TrainConfig cfg = train_config(8);
    PlannerConfig pcfg;
    pcfg.pipeline_degrees = {pp};
    pcfg.memory_headroom = 1.0;
    PlannerConfig uniform_cfg = pcfg;
    uniform_cfg.uniform_split_only = true;

    double searched = search(model, cluster, cfg, pcfg).eval.sim.iteration_time_s;
    double uniform = search(model, cluster, cfg, uniform_cfg).eval.sim.iteration_time_s;
    REQUIRE_MESSAGE(searched <= uniform, "instance " << i << " ratio " << ratio);
    if (searched < uniform) ++strict;
  }
  REQUIRE(strict >= 90);
  std::ostringstream msg;
  msg << "searched <= uniform on 100/100, strictly better on " << strict << "/100";
  pass(4, msg.str().c_str());
}

TEST_CASE("criterion 5: paper-shaped 12-stage 1:5 cluster lands near the bound") {
  // Llama2-70B-like model on 2+10 nodes; IB inside groups, Ethernet across.
  ModelSpec model;
  model.num_layers = 80;
  model.hidden_size = 8192;
  model.seq_length = 4096;
  model.vocab_size = 32000;
  model.num_heads = 64;
  model.bytes_per_element = 2;

  ClusterSpec cluster;
  DeviceGroup amd;
  amd.name = "amd";
  amd.peak_tflops = 383.0;
  amd.compute_efficiency = 0.245;  // ~93.8 effective TFLOPS
  amd.memory_bytes = 64e9;
  amd.node_count = 2;
  amd.devices_per_node = 8;
  DeviceGroup gpu_a;
  gpu_a.name = "gpu_a";
  gpu_a.peak_tflops = 147.0;
  gpu_a.compute_efficiency = 0.327;  // ~48.1 effective TFLOPS
  gpu_a.memory_bytes = 64e9;
  gpu_a.node_count = 10;
  gpu_a.devices_per_node = 8;
  cluster.groups = {amd, gpu_a};
  // 600 GB/s-class in-node fabric, 200 Gb/s IB between homogeneous nodes,
  // 25 Gb/s staged Ethernet across the accelerator types.
  cluster.links = {
      make_link(ScopeKind::IntraNode, "amd", "", 4.8e12, 0.85),
      make_link(ScopeKind::InterNodeHomogeneous, "amd", "", 200e9, 0.85),
      make_link(ScopeKind::IntraNode, "gpu_a", "", 4.8e12, 0.85),
      make_link(ScopeKind::InterNodeHomogeneous, "gpu_a", "", 200e9, 0.85),
      make_link(ScopeKind::InterGroup, "amd", "gpu_a", 25e9, 0.76, 0.0, PathKind::CpuStaged,
                16e9),
  };

  TrainConfig cfg = train_config(256, 1);
  PlannerConfig pcfg;
  pcfg.pipeline_degrees = {12};

  SearchOutcome outcome = search(model, cluster, cfg, pcfg);
  MetricsReport metrics = build_metrics(outcome.plan, model, cluster, cfg, outcome.eval);
  REQUIRE_MESSAGE(metrics.pct_of_theoretical >= 85.0,
                  "pct_of_theoretical = " << metrics.pct_of_theoretical);
  REQUIRE_MESSAGE(metrics.pct_of_theoretical <= 100.0,
                  "pct_of_theoretical = " << metrics.pct_of_theoretical);
  std::ostringstream msg;
  msg << "searched plan reaches " << round2(metrics.pct_of_theoretical)
      << "% of the count-weighted homogeneous bound";
  pass(5, msg.str().c_str());
}

TEST_CASE("criterion 6: apportionment matches the independent oracle") {
  CHECK(split_layers(80, std::vector<double>(10, 1.0)) == std::vector<int>(10, 8));
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> w(0.05, 10.0);
  long long cases = 0;
  for (int total = 1; total <= 30; ++total) {
    for (int stages = 1; stages <= std::min(6, total); ++stages) {
      for (int draw = 0; draw < 30; ++draw) {
        std::vector<double> weights(stages);
        for (double& x : weights) x = w(rng);
        REQUIRE(split_layers(total, weights) == apportion_oracle(total, weights));
        ++cases;
      }
    }
  }
  std::ostringstream msg;
  msg << "largest-remainder oracle equality on " << cases << " cases plus [8]x10 fixture";
  pass(6, msg.str().c_str());
}

TEST_CASE("criterion 7: cmd_plan and cmd_simulate are byte-deterministic") {
  TempDir dir;
  cli::Options opts;
  opts.model_path = dir.file("model.json", to_json(tiny_model(12)).dump());
  opts.cluster_path =
      dir.file("cluster.json", to_json(two_group_cluster(2, 2, 1.8, 5e9)).dump());
  opts.train_path = dir.file("train.json", to_json(train_config(8)).dump());
  opts.planner_path =
      dir.file("planner.json", R"({"pipeline_degrees":[2,4],"memory_headroom":1.0})");

  std::vector<std::string> out_dirs;
  for (int jobs : {1, 1, 4}) {
    cli::Options run = opts;
    run.jobs = jobs;
    run.out_path = (dir.path / ("out_" + std::to_string(out_dirs.size()))).string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_plan(run, out, err) == cli::kOk);
    out_dirs.push_back(run.out_path);
  }
  for (const char* name : {"plan.json", "report.json", "search_log.ndjson"}) {
    std::string first = read_file((fs::path(out_dirs[0]) / name).string());
    for (std::size_t i = 1; i < out_dirs.size(); ++i)
      REQUIRE_MESSAGE(first == read_file((fs::path(out_dirs[i]) / name).string()),
                      name << " differs between runs");
  }

  cli::Options sim = opts;
  sim.plan_path = (fs::path(out_dirs[0]) / "plan.json").string();
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    cli::Options run = sim;
    run.out_path = (dir.path / ("sim_" + std::to_string(i) + ".json")).string();
    run.trace_out = (dir.path / ("trace_" + std::to_string(i) + ".json")).string();
    std::ostringstream out, err;
    REQUIRE(cli::cmd_simulate(run, out, err) == cli::kOk);
    reports[i] = read_file(run.out_path) + read_file(run.trace_out);
  }
  REQUIRE(reports[0] == reports[1]);
  pass(7, "byte-identical outputs across reruns and --jobs 1 vs 4");
}

TEST_CASE("criterion 8: calibration scales inversely with profiled times") {
  ClusterSpec cluster;
  DeviceGroup g;
  g.name = "gpu";
  g.peak_tflops = 100.0;
  g.memory_bytes = 1e18;
  g.node_count = 1;
  g.devices_per_node = 1;
  cluster.groups = {g};
  cluster.links = {make_link(ScopeKind::IntraNode, "gpu", "", 1e12),
                   make_link(ScopeKind::InterNodeHomogeneous, "gpu", "", 1e12)};
  ModelSpec model = tiny_model(4);

  ProfileRecord base;
  base.device_type = "gpu";
  base.micro_batch = 2;
  base.seq_length = 128;
  base.hidden = 256;
  base.tp_degree = 1;
  double flops = layer_flops(tiny_model(1, 256, 128), 2, Direction::Forward);
  base.fwd_ms = flops / (g.peak_tflops * 1e12) * 1e3 / 0.5;  // efficiency 0.5
  base.bwd_ms = 2.0 * base.fwd_ms;

  double base_eff =
      calibrate({base}, model, cluster).cluster.groups[0].compute_efficiency;
  REQUIRE(base_eff == Approx(0.5).epsilon(1e-12));
  for (double k : {0.5, 2.0, 4.0}) {
    ProfileRecord scaled = base;
    scaled.fwd_ms *= k;
    scaled.bwd_ms *= k;
    double eff = calibrate({scaled}, model, cluster).cluster.groups[0].compute_efficiency;
    REQUIRE_MESSAGE(eff == Approx(base_eff / k).epsilon(1e-12), "k=" << k);
  }
  pass(8, "profiled times scaled by k calibrate efficiency to 1/k for k in {0.5,2,4}");
}
