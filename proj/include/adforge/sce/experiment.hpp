// Copyright 2026 The adforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adforge/adtree/model.hpp"

namespace adforge::sce {

enum class StageAction {
  kCheckFindings,
  kCreateSpotInstance,
  kStartListener,
  kExtractCredentials,
  kUseCredentials,
  kCustom,
};

std::string_view ActionName(StageAction action);
std::optional<StageAction> ActionFromName(std::string_view name);

struct Stage {
  std::string name;
  StageAction action = StageAction::kCustom;
  std::map<std::string, std::string> params;
  std::string expected;
  // Tree node the stage was compiled from, if any.
  std::optional<std::string> source_node;

  // Throws ValidationError when a required parameter is missing.
  void Validate() const;

  bool operator==(const Stage&) const = default;
};

struct Hypothesis {
  std::string text;
  std::string expect_finding;

  bool operator==(const Hypothesis&) const = default;
};

struct SCEExperiment {
  std::string name;
  std::string observability;
  std::vector<std::string> steady_state;
  Hypothesis hypothesis;
  std::vector<Stage> stages;
  adtree::Branch source_branch;

  void Validate() const;

  bool operator==(const SCEExperiment&) const = default;
};

// Templates used when compiling a branch.
struct ScenarioDefaults {
  std::string name;
  std::string observability;
  std::vector<std::string> steady_state;
  std::string hypothesis;
  std::string expect_finding;
  // Stages placed before the compiled ones.
  std::vector<StageAction> preflight;
};

ScenarioDefaults BuiltinDefaults();
ScenarioDefaults ScenarioDefaultsFromJson(const nlohmann::json& doc);
ScenarioDefaults LoadScenarioDefaults(const std::filesystem::path& path);

// First match in a fixed keyword table over all commands of a node.
StageAction InferAction(const std::vector<std::string>& commands);
// `aws iam list-users ...` -> `iam:ListUsers`; nullopt when no aws call.
std::optional<std::string> ApiActionFromCommand(const std::string& command);

// One stage per attack node of the branch, after any preflight stages.
// Throws UnusableBranch when attack nodes lack commands, ValidationError
// when a compiled stage is missing required parameters.
SCEExperiment CompileExperiment(const adtree::Branch& branch, const adtree::ADTree& tree,
                                const ScenarioDefaults& defaults);

nlohmann::json ToJson(const SCEExperiment& exp);
nlohmann::json ToJson(const Stage& stage);
SCEExperiment ExperimentFromJson(const nlohmann::json& doc);
// YAML or JSON file; see docs/experiment-schema.md.
SCEExperiment LoadExperiment(const std::filesystem::path& path);

}  // namespace adforge::sce
