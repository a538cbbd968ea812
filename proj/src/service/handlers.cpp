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

#include "adforge/service/handlers.hpp"

#include "adforge/adtree/branch.hpp"
#include "adforge/adtree/dot.hpp"

namespace adforge::service {

namespace {

std::optional<std::string> OptString(const nlohmann::json& args, const char* key) {
  if (!args.is_object() || !args.contains(key) || args.at(key).is_null()) return std::nullopt;
  if (!args.at(key).is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
  return args.at(key).get<std::string>();
}

std::string_view FaultName(StructureFault f) {
  switch (f) {
    case StructureFault::kCycle:
      return "cycle";
    case StructureFault::kNoRoot:
      return "no_root";
    case StructureFault::kMultipleRoots:
      return "multiple_roots";
    case StructureFault::kUnreachable:
      return "unreachable";
    case StructureFault::kInDegree:
      return "in_degree";
    case StructureFault::kDuplicateEdge:
      return "duplicate_edge";
    case StructureFault::kMissingNode:
      return "missing_node";
    case StructureFault::kInvalidAnnotation:
      return "invalid_annotation";
    case StructureFault::kEmptyId:
      return "empty_id";
  }
  return "unknown";
}

}  // namespace

nlohmann::json ScoreDocument(const std::string& dot, const metrics::TechniqueCatalog& catalog,
                             const std::optional<metrics::ReferenceOrder>& reference) {
  const adtree::ADTree tree = adtree::ParseDot(dot);
  return metrics::ToJson(metrics::TreeScore(tree, catalog, reference));
}

std::string Render(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

adtree::StyleSheet StyleSheetFromJson(const nlohmann::json& doc) {
  adtree::StyleSheet sheet;
  if (doc.is_null()) return sheet;
  if (!doc.is_object()) throw ValidationError("style must be an object");
  if (doc.contains("fill")) {
    for (const auto& [kind, color] : doc.at("fill").items()) {
      auto k = adtree::KindFromName(kind);
      if (!k) throw ValidationError("unknown node kind '" + kind + "' in style");
      if (!color.is_string() || !adtree::IsColor(color.get<std::string>())) {
        throw ValidationError("invalid color for '" + kind + "'");
      }
      sheet.fill[*k] = color.get<std::string>();
    }
  }
  if (doc.contains("fontname")) sheet.fontname = doc.at("fontname").get<std::string>();
  if (doc.contains("fontsize")) {
    if (!doc.at("fontsize").is_number_integer() || doc.at("fontsize").get<int>() <= 0) {
      throw ValidationError("fontsize must be a positive integer");
    }
    sheet.fontsize = doc.at("fontsize").get<int>();
  }
  return sheet;
}

nlohmann::json ToJson(const adtree::StyleSheet& sheet) {
  nlohmann::json fill = nlohmann::json::object();
  for (const auto& [kind, color] : sheet.fill) fill[std::string(adtree::KindName(kind))] = color;
  nlohmann::json j = {{"fill", fill}};
  if (sheet.fontname) j["fontname"] = *sheet.fontname;
  if (sheet.fontsize) j["fontsize"] = *sheet.fontsize;
  return j;
}

void ApplyFlowOp(flow::Orchestrator& orch, flow::FlowSession& session, const std::string& op,
                 const nlohmann::json& args) {
  if (op == "insert") {
    orch.InsertPrompt(session);
  } else if (op == "branch") {
    const std::string mode_name = OptString(args, "mode").value_or("generalized");
    auto mode = flow::BranchModeFromName(mode_name);
    if (!mode) throw ValidationError("mode must be generalized or specific");
    orch.RequestBranch(session, *mode, OptString(args, "component"), OptString(args, "resource_doc"));
  } else if (op == "merge") {
    orch.MergeComponents(session);
  } else if (op == "cosmetics") {
    std::optional<adtree::StyleSheet> style;
    if (args.is_object() && args.contains("style") && !args.at("style").is_null()) {
      style = StyleSheetFromJson(args.at("style"));
    }
    orch.ApplyCosmetics(session, style, OptString(args, "restructure"));
  } else if (op == "validate") {
    auto verdict = flow::VerdictFromName(OptString(args, "verdict").value_or(""));
    if (!verdict) throw ValidationError("verdict must be accept or refine");
    orch.SubmitValidation(session, *verdict, OptString(args, "feedback"));
  } else {
    throw ValidationError("unknown flow operation '" + op + "'");
  }
}

sce::SCEExperiment CompileBranch(const adtree::ADTree& tree, const std::string& goal,
                                 const std::optional<std::string>& leaf_hint,
                                 const sce::ScenarioDefaults& defaults) {
  return sce::CompileExperiment(adtree::ExtractBranch(tree, goal, leaf_hint), tree, defaults);
}

int ExperimentExitCode(sce::HypothesisVerdict verdict) {
  switch (verdict) {
    case sce::HypothesisVerdict::kConfirmed:
      return 0;
    case sce::HypothesisVerdict::kRefuted:
      return 4;
    case sce::HypothesisVerdict::kInconclusive:
      return 5;
  }
  return 5;
}

nlohmann::json ErrorBody(const Error& error) {
  nlohmann::json detail = nlohmann::json::object();
  if (const auto* e = dynamic_cast<const ParseError*>(&error)) {
    detail = {{"line", e->line()}, {"column", e->column()}, {"reason", e->detail()}};
  } else if (const auto* e = dynamic_cast<const StructureError*>(&error)) {
    detail = {{"fault", FaultName(e->fault())}, {"subject", e->subject()}};
  } else if (const auto* e = dynamic_cast<const BackendError*>(&error)) {
    detail = {{"status", e->status()}};
  } else if (const auto* e = dynamic_cast<const CandidateRejected*>(&error)) {
    detail = {{"raw_block", e->raw_block()}};
  } else if (const auto* e = dynamic_cast<const UnusableBranch*>(&error)) {
    detail = {{"nodes", e->nodes()}};
  }
  return {{"schema_version", kApiSchemaVersion},
          {"code", error.code()},
          {"message", error.what()},
          {"detail", detail}};
}

int HttpStatusFor(const Error& error) {
  if (dynamic_cast<const CandidateRejected*>(&error) || dynamic_cast<const NoDotFound*>(&error) ||
      dynamic_cast<const BackendError*>(&error)) {
    return 502;
  }
  if (dynamic_cast<const NotFound*>(&error)) return 404;
  if (dynamic_cast<const IllegalTransition*>(&error) ||
      dynamic_cast<const PreconditionError*>(&error)) {
    return 409;
  }
  if (dynamic_cast<const IoError*>(&error)) return 500;
  return 400;
}

}  // namespace adforge::service
