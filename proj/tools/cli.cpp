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
#include "cli.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "hetplan/errors.hpp"
#include "hetplan/json_io.hpp"
#include "hetplan/metrics.hpp"
#include "hetplan/planner.hpp"
#include "hetplan/profile.hpp"

namespace hetplan::cli {

namespace {

using nlohmann::json;

struct Inputs {
  ModelSpec model;
  ClusterSpec cluster;
  TrainConfig train;
  PlannerConfig planner;
  std::map<std::string, std::string> digests;
  std::vector<std::string> overrides_applied;  // in application order, for provenance
};

// Splits "doc.path=value" into (doc, path, value).
struct Override {
  std::string doc;
  std::string path;
  std::string value;
};

Override parse_override(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + spec + "': expected doc.path=value");
  std::string key = spec.substr(0, eq);
  Override o;
  o.value = spec.substr(eq + 1);
  auto dot = key.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override '" + spec +
                      "': path must start with model./cluster./train./planner.");
  o.doc = key.substr(0, dot);
  o.path = key.substr(dot + 1);
  if (o.doc != "model" && o.doc != "cluster" && o.doc != "train" && o.doc != "planner")
    throw ConfigError("override '" + spec + "': unknown document '" + o.doc + "'");
  return o;
}

json load_doc(const std::string& path, const std::string& doc_name, Inputs& inputs,
              const std::vector<Override>& overrides) {
  LoadedJson loaded = load_json_file(path);
  inputs.digests[doc_name] = loaded.digest;
  for (const Override& o : overrides) {
    if (o.doc != doc_name) continue;
    apply_override(loaded.doc, o.path, o.value);
    inputs.overrides_applied.push_back(o.doc + "." + o.path + "=" + o.value);
  }
  return loaded.doc;
}

Inputs load_inputs(const Options& opts, std::ostream& err) {
  Inputs inputs;
  std::vector<Override> overrides;
  for (const std::string& s : opts.overrides) overrides.push_back(parse_override(s));

  if (opts.model_path.empty()) throw ConfigError("--model is required");
  if (opts.cluster_path.empty()) throw ConfigError("--cluster is required");
  if (opts.train_path.empty()) throw ConfigError("--train is required");

  inputs.model = model_from_json(load_doc(opts.model_path, "model", inputs, overrides));
  inputs.cluster = cluster_from_json(load_doc(opts.cluster_path, "cluster", inputs, overrides));
  inputs.train = train_from_json(load_doc(opts.train_path, "train", inputs, overrides));
  if (!opts.planner_path.empty()) {
    inputs.planner = planner_from_json(load_doc(opts.planner_path, "planner", inputs, overrides));
  } else {
    // Overrides may configure the planner without a file.
    json doc = json::object();
    for (const Override& o : overrides) {
      if (o.doc != "planner") continue;
      json value = json::parse(o.value, nullptr, false);
      doc[o.path] = value.is_discarded() ? json(o.value) : value;
      inputs.overrides_applied.push_back(o.doc + "." + o.path + "=" + o.value);
    }
    inputs.planner = planner_from_json(doc);
  }

  if (!opts.profiles_path.empty()) {
    std::string text = read_file(opts.profiles_path);
    inputs.digests["profiles"] = digest_hex(text);
    ParsedProfiles parsed = parse_profiles(text);
    for (const std::string& d : parsed.diagnostics) err << "profiles: " << d << "\n";
    CalibrationResult cal = calibrate(parsed.records, inputs.model, inputs.cluster);
    for (const std::string& d : cal.diagnostics) err << "calibration: " << d << "\n";
    inputs.cluster = std::move(cal.cluster);
  }
  return inputs;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json per_stage_json(const ParallelPlan& plan, const PlanEvaluation& eval) {
  json stages = json::array();
  for (int i = 0; i < plan.stage_count(); ++i) {
    const StageAssignment& s = plan.stages[i];
    stages.push_back(json{{"stage", i},
                          {"group", s.group},
                          {"layers", s.layer_range.count()},
                          {"nodes_used", s.nodes_used},
                          {"dp_degree", s.dp_degree},
                          {"tp_degree", s.tp_degree},
                          {"fwd_s", eval.costs.times[i].fwd_s},
                          {"bwd_s", eval.costs.times[i].bwd_s},
                          {"send_fwd_s", eval.costs.times[i].send_fwd_s},
                          {"send_bwd_s", eval.costs.times[i].send_bwd_s},
                          {"dp_sync_s", eval.costs.dp_sync_s[i]},
                          {"busy_s", eval.sim.per_stage_busy_s[i]},
                          {"bubble_ratio", eval.sim.per_stage_bubble_ratio[i]},
                          {"peak_in_flight", eval.sim.peak_in_flight[i]},
                          {"peak_memory_bytes", eval.sim.peak_memory_bytes[i]}});
  }
  return stages;
}

json report_json(const Inputs& inputs, const ParallelPlan& plan, const PlanEvaluation& eval,
                 const MetricsReport& metrics) {
  json j{{"schema_version", kSchemaVersion},
         {"inputs", inputs.digests},
         {"plan", to_json(plan)},
         {"iteration_time_s", eval.sim.iteration_time_s},
         {"pipeline_time_s", eval.pipeline_time_s},
         {"micro_batches", eval.micro_batches},
         {"total_devices", eval.total_devices},
         {"tgs", round2(metrics.tgs)},
         {"achieved_tflops", metrics.achieved_tflops},
         {"mfu_pct", round2(metrics.mfu_pct)},
         {"theoretical_upper_bound", round2(metrics.theoretical_upper_bound)},
         {"pct_of_theoretical", round2(metrics.pct_of_theoretical)},
         {"bubble", json{{"aggregate", eval.sim.aggregate_bubble_ratio},
                         {"per_stage", eval.sim.per_stage_bubble_ratio}}},
         {"per_stage", per_stage_json(plan, eval)}};
  if (!inputs.overrides_applied.empty()) j["overrides"] = inputs.overrides_applied;
  if (metrics.improvement_pct) j["improvement_pct"] = round2(*metrics.improvement_pct);
  json groups = json::array();
  for (const GroupMetrics& g : metrics.per_group)
    groups.push_back(json{{"group", g.name},
                          {"devices", g.devices},
                          {"achieved_tflops", g.achieved_tflops},
                          {"ideal_tgs", g.ideal_tgs}});
  j["per_group"] = groups;
  return j;
}

ParallelPlan load_plan(const std::string& path, Inputs& inputs, const char* tag) {
  if (path.empty()) throw ConfigError(std::string("--") + tag + " is required");
  LoadedJson loaded = load_json_file(path);
  inputs.digests[tag] = loaded.digest;
  return plan_from_json(loaded.doc);
}

// Validation failures are a plan problem, not an input-parse problem.
void require_valid(const ParallelPlan& plan, const Inputs& inputs, const char* tag) {
  ValidationReport report = validate_plan(plan, inputs.model, inputs.cluster, inputs.train);
  if (!report.ok())
    throw PlanError(std::string(tag) + " failed validation", report.violations);
}

json wrapped_trace(const Inputs& inputs, const SimResult& sim) {
  return json{{"schema_version", kSchemaVersion},
              {"inputs", inputs.digests},
              {"events", trace_to_json(sim.trace)}};
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const PlanError& e) {
    err << "error: " << e.what() << "\n";
    for (const std::string& v : e.violations) err << "  violation: " << v << "\n";
    return kInfeasible;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    for (const std::string& r : e.reasons) err << "  " << r << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace

int cmd_plan(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    Inputs inputs = load_inputs(opts, err);
    SearchOutcome outcome = search(inputs.model, inputs.cluster, inputs.train, inputs.planner,
                                   opts.jobs);
    outcome.plan.input_digests = {{"model", inputs.digests.at("model")},
                                  {"cluster", inputs.digests.at("cluster")},
                                  {"train", inputs.digests.at("train")}};

    PlanEvaluation& eval = outcome.eval;
    MetricsReport metrics = build_metrics(outcome.plan, inputs.model, inputs.cluster,
                                          inputs.train, eval);

    std::filesystem::path dir = opts.out_path.empty() ? "." : opts.out_path;
    std::filesystem::create_directories(dir);
    write_file((dir / "plan.json").string(), dump(to_json(outcome.plan)));
    write_file((dir / "report.json").string(),
               dump(report_json(inputs, outcome.plan, eval, metrics)));
    std::ostringstream log;
    log << json{{"schema_version", kSchemaVersion},
                {"inputs", inputs.digests},
                {"candidates_simulated", outcome.candidates_simulated},
                {"candidates_pruned", outcome.candidates_pruned}}
               .dump()
        << "\n";
    for (const SearchLogEntry& e : outcome.log) {
      json line = json::parse(e.candidate);
      if (e.prune_reason.empty())
        line["time_s"] = e.time_s;
      else
        line["prune_reason"] = e.prune_reason;
      log << line.dump() << "\n";
    }
    write_file((dir / "search_log.ndjson").string(), log.str());

    out << render_text_report(outcome.plan, metrics, eval);
    out << "candidates simulated " << outcome.candidates_simulated << ", pruned "
        << outcome.candidates_pruned << "\n";
    out << "wrote " << (dir / "plan.json").string() << "\n";
    return kOk;
  });
}

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    Inputs inputs = load_inputs(opts, err);
    ParallelPlan plan = load_plan(opts.plan_path, inputs, "plan");
    require_valid(plan, inputs, "plan");

    PlanEvaluation eval = evaluate_plan(plan, inputs.model, inputs.cluster, inputs.train);
    MetricsReport metrics = build_metrics(plan, inputs.model, inputs.cluster, inputs.train, eval);
    json report = report_json(inputs, plan, eval, metrics);

    if (!opts.out_path.empty())
      write_file(opts.out_path, dump(report));
    else
      out << dump(report);
    if (!opts.trace_out.empty()) write_file(opts.trace_out, dump(wrapped_trace(inputs, eval.sim)));
    out << render_text_report(plan, metrics, eval);
    return kOk;
  });
}

int cmd_compare(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    Inputs inputs = load_inputs(opts, err);
    ParallelPlan baseline = load_plan(opts.baseline_path, inputs, "baseline");
    ParallelPlan candidate = load_plan(opts.plan_path, inputs, "plan");

    // Plans must have been produced for the same model document.
    const std::string& model_digest = inputs.digests.at("model");
    for (const auto& [name, plan] : {std::pair<const char*, const ParallelPlan*>{"baseline",
                                                                                 &baseline},
                                     {"plan", &candidate}}) {
      auto it = plan->input_digests.find("model");
      if (it != plan->input_digests.end() && it->second != model_digest)
        throw PlanError(std::string(name) + ": model digest mismatch (" + it->second +
                        " vs " + model_digest + ")");
    }

    require_valid(baseline, inputs, "baseline");
    require_valid(candidate, inputs, "plan");

    PlanEvaluation base_eval = evaluate_plan(baseline, inputs.model, inputs.cluster, inputs.train);
    PlanEvaluation cand_eval = evaluate_plan(candidate, inputs.model, inputs.cluster,
                                             inputs.train);
    MetricsReport base_metrics =
        build_metrics(baseline, inputs.model, inputs.cluster, inputs.train, base_eval);
    MetricsReport cand_metrics =
        build_metrics(candidate, inputs.model, inputs.cluster, inputs.train, cand_eval);
    double improvement =
        improvement_pct(base_eval.sim.iteration_time_s, cand_eval.sim.iteration_time_s);
    cand_metrics.improvement_pct = improvement;

    json report{{"schema_version", kSchemaVersion},
                {"inputs", inputs.digests},
                {"baseline", report_json(inputs, baseline, base_eval, base_metrics)},
                {"candidate", report_json(inputs, candidate, cand_eval, cand_metrics)},
                {"improvement_pct", round2(improvement)}};
    if (!opts.out_path.empty())
      write_file(opts.out_path, dump(report));
    else
      out << dump(report);

    out << "baseline  iteration " << base_eval.sim.iteration_time_s << " s\n";
    out << "candidate iteration " << cand_eval.sim.iteration_time_s << " s\n";
    out << "improvement " << round2(improvement) << "%\n";
    return kOk;
  });
}

int cmd_trace(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() {
    Inputs inputs = load_inputs(opts, err);
    ParallelPlan plan = load_plan(opts.plan_path, inputs, "plan");
    require_valid(plan, inputs, "plan");
    PlanEvaluation eval = evaluate_plan(plan, inputs.model, inputs.cluster, inputs.train);
    json trace = wrapped_trace(inputs, eval.sim);
    if (!opts.out_path.empty())
      write_file(opts.out_path, dump(trace));
    else
      out << dump(trace);
    return kOk;
  });
}

}  // namespace hetplan::cli
