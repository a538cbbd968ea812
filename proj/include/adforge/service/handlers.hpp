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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "adforge/adtree/model.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/session.hpp"
#include "adforge/metrics/metrics.hpp"
#include "adforge/sce/experiment.hpp"
#include "adforge/sce/runner.hpp"

// Request handling shared by the CLI and the HTTP service, so both paths
// produce the same documents for the same inputs.
namespace adforge::service {

inline constexpr const char* kApiSchemaVersion = "1";

// MetricReport document for a DOT text. Throws ParseError, StructureError,
// EmptyTree.
nlohmann::json ScoreDocument(const std::string& dot, const metrics::TechniqueCatalog& catalog,
                             const std::optional<metrics::ReferenceOrder>& reference);

// Serialization used for every JSON body and `--json` output.
std::string Render(const nlohmann::json& doc);

// {"fill": {"attack": "#ADD8E6", ...}, "fontname": ..., "fontsize": ...}
adtree::StyleSheet StyleSheetFromJson(const nlohmann::json& doc);
nlohmann::json ToJson(const adtree::StyleSheet& sheet);

// Applies one flow operation named by `op` ("insert", "branch", "merge",
// "cosmetics", "validate") with the arguments in `args`.
void ApplyFlowOp(flow::Orchestrator& orch, flow::FlowSession& session, const std::string& op,
                 const nlohmann::json& args);

// Compiles the branch ending at `goal` (optionally through `leaf_hint`).
sce::SCEExperiment CompileBranch(const adtree::ADTree& tree, const std::string& goal,
                                 const std::optional<std::string>& leaf_hint,
                                 const sce::ScenarioDefaults& defaults);

// Exit codes of the experiment subcommand.
int ExperimentExitCode(sce::HypothesisVerdict verdict);
inline constexpr int kExitUnusableBranch = 6;

// {code, message, detail, schema_version}
nlohmann::json ErrorBody(const Error& error);
int HttpStatusFor(const Error& error);

}  // namespace adforge::service
