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
#ifndef HETPLAN_ERRORS_HPP_
#define HETPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace hetplan {

// Malformed or inconsistent input documents (model/cluster/train/planner
// files, profile records, link configuration). CLI exit status 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A plan that fails validation against its model/cluster/config.
// CLI exit status 2.
struct PlanError : std::runtime_error {
  explicit PlanError(const std::string& what, std::vector<std::string> violations = {})
      : std::runtime_error(what), violations(std::move(violations)) {}
  std::vector<std::string> violations;
};

// The planner found no feasible plan; `reasons` lists the binding
// constraint per rejected candidate. CLI exit status 2.
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what, std::vector<std::string> reasons = {})
      : std::runtime_error(what), reasons(std::move(reasons)) {}
  std::vector<std::string> reasons;
};

}  // namespace hetplan

#endif  // HETPLAN_ERRORS_HPP_
