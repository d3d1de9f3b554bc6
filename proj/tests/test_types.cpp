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
#include <random>

#include "doctest.h"

#include "hetplan/errors.hpp"
#include "hetplan/json_io.hpp"
#include "hetplan/types.hpp"
#include "test_util.hpp"

using namespace hetplan;
using namespace hetplan::testutil;

namespace {

// The 12-stage deployment from the published MFU experiment: 80 layers over
// a 1:5 two-group cluster.
ParallelPlan paper_fixture_plan() {
  std::vector<int> counts{7, 6, 6, 6, 6, 7, 7, 7, 7, 7, 7, 7};
  std::vector<std::string> groups;
  groups.insert(groups.end(), 2, "fast");
  groups.insert(groups.end(), 10, "slow");
  return single_node_plan(counts, groups, /*micro_batches=*/8);
}

}  // namespace

TEST_CASE("validate_plan accepts the 12-stage 80-layer fixture") {
  ModelSpec model = tiny_model(80);
  ClusterSpec cluster = two_group_cluster(2, 10, 2.0);
  TrainConfig cfg = train_config(8);
  ParallelPlan plan = paper_fixture_plan();
  ValidationReport report = validate_plan(plan, model, cluster, cfg);
  std::string first_violation = report.ok() ? std::string() : report.violations.front();
  CHECK_MESSAGE(report.ok(), first_violation);

  // Purity: identical inputs, identical report.
  ValidationReport again = validate_plan(plan, model, cluster, cfg);
  CHECK(report.violations == again.violations);
}

TEST_CASE("validate_plan flags uncovered layers") {
  ModelSpec model = tiny_model(80);
  ClusterSpec cluster = two_group_cluster(2, 10, 2.0);
  TrainConfig cfg = train_config(8);
  ParallelPlan plan = paper_fixture_plan();
  plan.stages.back().layer_range.end = 79;  // covers only 79 of 80
  ValidationReport report = validate_plan(plan, model, cluster, cfg);
  REQUIRE_FALSE(report.ok());
  bool found = false;
  for (const std::string& v : report.violations)
    if (v.find("uncovered layers") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate_plan flags TP exceeding the node") {
  ModelSpec model = tiny_model(16);
  ClusterSpec cluster = one_group_cluster(2, /*devices_per_node=*/8);
  TrainConfig cfg = train_config(4);
  ParallelPlan plan;
  plan.micro_batches_per_dp_replica = 4;
  plan.micro_batch_size = 1;
  StageAssignment s;
  s.layer_range = {0, 16};
  s.group = "gpu";
  s.nodes_used = 2;
  s.tp_degree = 16;  // > devices_per_node
  s.dp_degree = 1;
  plan.stages = {s};
  ValidationReport report = validate_plan(plan, model, cluster, cfg);
  REQUIRE_FALSE(report.ok());
  bool found = false;
  for (const std::string& v : report.violations)
    if (v.find("TP exceeds node") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate_plan flags over-allocation, gaps, and dp mismatch") {
  ModelSpec model = tiny_model(8);
  ClusterSpec cluster = two_group_cluster(1, 1, 2.0);
  TrainConfig cfg = train_config(4);

  SUBCASE("group over-allocated") {
    ParallelPlan plan = single_node_plan({4, 4}, {"fast", "fast"}, 4);
    ValidationReport report = validate_plan(plan, model, cluster, cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations.front().find("over-allocated") != std::string::npos);
  }
  SUBCASE("non-contiguous ranges") {
    ParallelPlan plan = single_node_plan({4, 4}, {"fast", "slow"}, 4);
    plan.stages[1].layer_range = {5, 8};  // gap at layer 4
    ValidationReport report = validate_plan(plan, model, cluster, cfg);
    REQUIRE_FALSE(report.ok());
  }
  SUBCASE("dp must match across stages") {
    ParallelPlan plan = single_node_plan({4, 4}, {"fast", "slow"}, 4);
    plan.stages[1].dp_degree = 2;
    ValidationReport report = validate_plan(plan, model, cluster, cfg);
    REQUIRE_FALSE(report.ok());
  }
  SUBCASE("micro-batch accounting") {
    ParallelPlan plan = single_node_plan({4, 4}, {"fast", "slow"}, 3);  // M*B != G/dp
    ValidationReport report = validate_plan(plan, model, cluster, cfg);
    REQUIRE_FALSE(report.ok());
  }
  SUBCASE("missing heterogeneous link") {
    ClusterSpec no_link = cluster;
    no_link.links.pop_back();  // drop the inter-group link
    ParallelPlan plan = single_node_plan({4, 4}, {"fast", "slow"}, 4);
    ValidationReport report = validate_plan(plan, model, no_link, cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations.front().find("no heterogeneous link") != std::string::npos);
  }
}

TEST_CASE("spec validation rejects bad documents") {
  CHECK_THROWS_AS(
      [] {
        ModelSpec m = tiny_model(4);
        m.bytes_per_element = 3;
        validate_spec(m);
      }(),
      ConfigError);
  CHECK_THROWS_AS(
      [] {
        ModelSpec m = tiny_model(4);
        m.num_heads = 7;  // 128 % 7 != 0
        validate_spec(m);
      }(),
      ConfigError);
  CHECK_THROWS_AS(
      [] {
        ClusterSpec c = one_group_cluster(1);
        c.links.pop_back();  // lose the inter-node link
        validate_spec(c);
      }(),
      ConfigError);
  CHECK_THROWS_AS(
      [] {
        ClusterSpec c = two_group_cluster(1, 1, 2.0);
        c.links.push_back(make_link(ScopeKind::InterGroup, "slow", "fast", 1e9));
        validate_spec(c);  // duplicate unordered pair
      }(),
      ConfigError);
  CHECK_THROWS_AS(
      [] {
        ClusterSpec c = one_group_cluster(1);
        c.links.push_back(make_link(ScopeKind::InterGroup, "gpu", "ghost", 1e9));
        validate_spec(c);
      }(),
      ConfigError);
}

TEST_CASE("serialization round-trips every core type") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.1, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec m = tiny_model(1 + static_cast<int>(rng() % 100), 64 * (1 + rng() % 8), 64);
    m.activation_bytes_per_token_per_hidden = 34.0 * unit(rng);
    m.edge_layer_cost_multiplier = unit(rng);
    CHECK(model_from_json(to_json(m)) == m);

    ClusterSpec c = two_group_cluster(1 + rng() % 4, 1 + rng() % 8, 1.0 + unit(rng));
    c.groups[0].compute_efficiency = unit(rng);
    c.groups[1].bwd_fwd_ratio = 2.0 + unit(rng);
    c.links[4].path_kind = PathKind::CpuStaged;
    c.links[4].staging_copy_bytes_per_s = 16e9 * unit(rng);
    c.links[4].latency_s = 1e-6 * unit(rng);
    c.links[4].efficiency = unit(rng);
    CHECK(cluster_from_json(to_json(c)) == c);

    TrainConfig t = train_config(1 + static_cast<long long>(rng() % 512), 1);
    t.optimizer_state_multiplier = 4.0 + 8.0 * unit(rng);
    CHECK(train_from_json(to_json(t)) == t);

    ParallelPlan p = single_node_plan({2, 3}, {"fast", "slow"}, 1 + rng() % 16,
                                      trial % 2 == 0 ? Schedule::OneFOneB : Schedule::GPipe);
    p.input_digests = {{"model", "00ff"}, {"cluster", "abcd"}};
    CHECK(plan_from_json(to_json(p)) == p);
  }
}

TEST_CASE("plan parsing enforces schema_version") {
  ParallelPlan p = single_node_plan({2}, {"gpu"}, 2);
  nlohmann::json j = to_json(p);
  j["schema_version"] = 99;
  CHECK_THROWS_AS(plan_from_json(j), ConfigError);
  j.erase("schema_version");
  CHECK_THROWS_AS(plan_from_json(j), ConfigError);
}

TEST_CASE("dotted-path overrides address nested fields and arrays") {
  nlohmann::json doc = to_json(two_group_cluster(2, 10, 2.0));
  apply_override(doc, "groups.0.peak_tflops", "123.5");
  CHECK(cluster_from_json(doc).groups[0].peak_tflops == 123.5);
  apply_override(doc, "groups.1.name", "renamed");
  CHECK_THROWS_AS(apply_override(doc, "groups.7.peak_tflops", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "bogus.path.here", "1"), ConfigError);
}

TEST_CASE("digest is stable and content-sensitive") {
  CHECK(digest_hex("") == digest_hex(""));
  CHECK(digest_hex("a") != digest_hex("b"));
  CHECK(digest_hex("hetplan").size() == 16);
}
