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
#include <iostream>

#include "CLI11.hpp"

#include "cli.hpp"

int main(int argc, char** argv) {
  using hetplan::cli::Options;

  CLI::App app{"hetplan: heterogeneous-cluster training planner and performance predictor"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opts.model_path, "model spec JSON")->required();
    sub->add_option("--cluster", opts.cluster_path, "cluster spec JSON")->required();
    sub->add_option("--train", opts.train_path, "training config JSON")->required();
    sub->add_option("--profiles", opts.profiles_path,
                    "NDJSON profile records; calibrates the cluster");
    sub->add_option("--set", opts.overrides, "dotted-path override, e.g. model.num_layers=12")
        ->take_all()
        ->allow_extra_args(false);
  };

  CLI::App* plan = app.add_subcommand("plan", "search for the best parallel plan");
  add_common(plan);
  plan->add_option("--planner", opts.planner_path, "planner config JSON");
  plan->add_option("--out", opts.out_path, "output directory (default .)");
  plan->add_option("--jobs", opts.jobs, "parallel search workers (default 1)");

  CLI::App* simulate = app.add_subcommand("simulate", "predict one plan's performance");
  add_common(simulate);
  simulate->add_option("--plan", opts.plan_path, "plan JSON")->required();
  simulate->add_option("--out", opts.out_path, "report JSON path (default stdout)");
  simulate->add_option("--trace-out", opts.trace_out, "write the event trace JSON here");

  CLI::App* compare = app.add_subcommand("compare", "compare a plan against a baseline");
  add_common(compare);
  compare->add_option("--plan", opts.plan_path, "candidate plan JSON")->required();
  compare->add_option("--baseline", opts.baseline_path, "baseline plan JSON")->required();
  compare->add_option("--out", opts.out_path, "report JSON path (default stdout)");

  CLI::App* trace = app.add_subcommand("trace", "export a plan's simulated event trace");
  add_common(trace);
  trace->add_option("--plan", opts.plan_path, "plan JSON")->required();
  trace->add_option("--out", opts.out_path, "trace JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hetplan::cli::kInputError;
  }

  if (plan->parsed()) return hetplan::cli::cmd_plan(opts, std::cout, std::cerr);
  if (simulate->parsed()) return hetplan::cli::cmd_simulate(opts, std::cout, std::cerr);
  if (compare->parsed()) return hetplan::cli::cmd_compare(opts, std::cout, std::cerr);
  if (trace->parsed()) return hetplan::cli::cmd_trace(opts, std::cout, std::cerr);
  return hetplan::cli::kInputError;
}
