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
#ifndef HETPLAN_TOOLS_CLI_HPP_
#define HETPLAN_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace hetplan::cli {

// Exit statuses shared by all subcommands.
enum Status : int { kOk = 0, kInputError = 1, kInfeasible = 2, kInternalError = 3 };

struct Options {
  std::string model_path;
  std::string cluster_path;
  std::string train_path;
  std::string planner_path;   // optional; defaults when empty
  std::string profiles_path;  // optional; calibrates the cluster when given
  std::string plan_path;      // candidate plan (simulate/compare/trace)
  std::string baseline_path;  // baseline plan (compare)
  std::string out_path;       // plan: output directory; others: report file
  std::string trace_out;      // simulate: optional trace file
  std::vector<std::string> overrides;  // "doc.path=value"
  int jobs = 1;
};

// plan: search for the best plan; writes plan.json, report.json, and
// search_log.ndjson under out_path (default ".").
int cmd_plan(const Options& opts, std::ostream& out, std::ostream& err);

// simulate: predict one plan; report JSON to out_path (or stdout), optional
// trace export.
int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err);

// compare: per-plan metrics plus improvement of --plan over --baseline.
int cmd_compare(const Options& opts, std::ostream& out, std::ostream& err);

// trace: simulate and emit only the event trace.
int cmd_trace(const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace hetplan::cli

#endif  // HETPLAN_TOOLS_CLI_HPP_
