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

#include "adforge/sce/experiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <sstream>

#include "adforge/errors.hpp"
#include "adforge/sce/cloud.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::sce {

namespace {

constexpr std::array<std::pair<StageAction, std::string_view>, 6> kActionNames = {{
    {StageAction::kCheckFindings, "CheckFindings"},
    {StageAction::kCreateSpotInstance, "CreateSpotInstance"},
    {StageAction::kStartListener, "StartListener"},
    {StageAction::kExtractCredentials, "ExtractCredentials"},
    {StageAction::kUseCredentials, "UseCredentials"},
    {StageAction::kCustom, "Custom"},
}};

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool ContainsAny(const std::string& hay, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return hay.find(n) != std::string::npos; });
}

std::string ScalarText(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string PascalCase(const std::string& kebab) {
  std::string out;
  bool upper = true;
  for (char c : kebab) {
    if (c == '-' || c == '_') {
      upper = true;
      continue;
    }
    out += upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
    upper = false;
  }
  return out;
}

Stage PreflightStage(StageAction action) {
  Stage s;
  s.action = action;
  switch (action) {
    case StageAction::kCheckFindings:
      s.name = "Verify the detector reports no prior findings";
      s.expected = "Findings list is empty";
      break;
    default:
      s.name = std::string(ActionName(action));
      break;
  }
  return s;
}

}  // namespace

std::string_view ActionName(StageAction action) {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "Custom";
}

std::optional<StageAction> ActionFromName(std::string_view name) {
  for (const auto& [a, n] : kActionNames) {
    if (n == name) return a;
  }
  return std::nullopt;
}

void Stage::Validate() const {
  auto require = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) {
      throw ValidationError("stage '" + name + "' (" + std::string(ActionName(action)) +
                            ") requires parameter " + key);
    }
  };
  switch (action) {
    case StageAction::kCreateSpotInstance:
      require("role_name");
      require("user_data_base64");
      break;
    case StageAction::kUseCredentials:
      require("api_action");
      break;
    default:
      break;
  }
}

void SCEExperiment::Validate() const {
  if (stages.empty()) throw ValidationError("experiment needs at least one stage");
  if (steady_state.empty()) throw ValidationError("experiment needs at least one steady-state check");
  CheckSteadyState(MockCloudState{}, steady_state);
  if (!IsKnownFindingType(hypothesis.expect_finding)) {
    throw ValidationError("hypothesis expects unknown finding type '" +
                          hypothesis.expect_finding + "'");
  }
  for (const auto& s : stages) s.Validate();
}

ScenarioDefaults BuiltinDefaults() {
  ScenarioDefaults d;
  d.name = "privilege-escalation";
  d.observability =
      "Detector findings and the simulated API event log of the account are collected for "
      "the whole run.";
  d.steady_state = {kCheckFindingsEmpty, kCheckNoOverprivilegedRoles, kCheckDetectorEnabled};
  d.hypothesis =
      "The detector raises a finding when a compute instance is launched with a privileged "
      "role and suspicious user data.";
  d.expect_finding = "PrivilegeEscalation:EC2/SpotInstanceSuspiciousUserData";
  return d;
}

ScenarioDefaults ScenarioDefaultsFromJson(const nlohmann::json& doc) {
  ScenarioDefaults d = BuiltinDefaults();
  if (!doc.is_object()) throw ValidationError("scenario defaults must be a mapping");
  d.name = doc.value("name", d.name);
  d.observability = doc.value("observability", d.observability);
  if (doc.contains("steady_state")) {
    const auto& ss = doc.at("steady_state");
    const auto& list = ss.is_object() ? ss.at("checks") : ss;
    d.steady_state = list.get<std::vector<std::string>>();
  }
  if (doc.contains("hypothesis")) {
    const auto& h = doc.at("hypothesis");
    if (h.is_string()) {
      d.hypothesis = h.get<std::string>();
    } else {
      d.hypothesis = h.value("text", d.hypothesis);
      d.expect_finding = h.value("expect_finding", d.expect_finding);
    }
  }
  d.expect_finding = doc.value("expect_finding", d.expect_finding);
  if (doc.contains("preflight")) {
    d.preflight.clear();
    for (const auto& a : doc.at("preflight")) {
      auto action = ActionFromName(a.get<std::string>());
      if (!action) throw ValidationError("unknown preflight action " + a.dump());
      d.preflight.push_back(*action);
    }
  }
  return d;
}

ScenarioDefaults LoadScenarioDefaults(const std::filesystem::path& path) {
  return ScenarioDefaultsFromJson(YamlTextToJson(ReadFile(path)));
}

StageAction InferAction(const std::vector<std::string>& commands) {
  std::string all;
  for (const auto& c : commands) all += Lower(c) + "\n";
  static const std::regex listener(R"((^|[\s;|&])(nc|ncat|netcat)\s+(-\w*l|--listen))");
  if (ContainsAny(all, {"request-spot-instances"})) return StageAction::kCreateSpotInstance;
  if (ContainsAny(all, {"169.254.169.254", "169.254.170.2", "security-credentials",
                        "meta-data/iam"})) {
    return StageAction::kExtractCredentials;
  }
  if (ContainsAny(all, {"guardduty list-findings", "guardduty get-findings"})) {
    return StageAction::kCheckFindings;
  }
  if (std::regex_search(all, listener) || ContainsAny(all, {"socat", "listener", "reverse shell"})) {
    return StageAction::kStartListener;
  }
  for (const auto& c : commands) {
    if (ApiActionFromCommand(c)) return StageAction::kUseCredentials;
  }
  return StageAction::kCustom;
}

std::optional<std::string> ApiActionFromCommand(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
    if (tokens[i] != "aws") continue;
    std::size_t j = i + 1;
    // Skip global options such as --profile x or --region y.
    while (j + 1 < tokens.size() && tokens[j].rfind("--", 0) == 0) j += 2;
    if (j + 1 >= tokens.size()) return std::nullopt;
    const std::string& service = tokens[j];
    const std::string& op = tokens[j + 1];
    if (op.rfind("-", 0) == 0) return std::nullopt;
    return Lower(service) + ":" + PascalCase(op);
  }
  return std::nullopt;
}

SCEExperiment CompileExperiment(const adtree::Branch& branch, const adtree::ADTree& tree,
                                const ScenarioDefaults& defaults) {
  for (std::size_t i = 0; i + 1 < branch.node_ids.size(); ++i) {
    const auto kids = tree.children(branch.node_ids[i]);
    if (std::find(kids.begin(), kids.end(), branch.node_ids[i + 1]) == kids.end()) {
      throw ValidationError("branch step " + branch.node_ids[i] + "->" + branch.node_ids[i + 1] +
                            " is not an edge of the tree");
    }
  }
  std::vector<const adtree::ADNode*> attacks;
  std::vector<std::string> unusable;
  for (const auto& id : branch.node_ids) {
    const auto& node = tree.node(id);
    if (node.kind != adtree::NodeKind::kAttack) continue;
    attacks.push_back(&node);
    if (node.commands.empty()) unusable.push_back(id);
  }
  if (!unusable.empty()) throw UnusableBranch(unusable);
  if (attacks.empty()) throw UnusableBranch({});

  SCEExperiment exp;
  exp.name = defaults.name.empty() ? "branch-" + attacks.back()->id
                                   : defaults.name + "-" + attacks.back()->id;
  exp.observability = defaults.observability;
  exp.steady_state = defaults.steady_state;
  exp.hypothesis = {defaults.hypothesis, defaults.expect_finding};
  exp.source_branch = branch;
  for (StageAction a : defaults.preflight) exp.stages.push_back(PreflightStage(a));

  for (const auto* node : attacks) {
    Stage s;
    s.name = node->label.empty() ? node->id : node->label;
    s.action = InferAction(node->commands);
    s.source_node = node->id;
    s.expected = node->expected_results.value_or("");
    std::size_t positional = 0;
    for (const auto& input : node->inputs) {
      const auto eq = input.find('=');
      if (eq == std::string::npos || eq == 0) {
        s.params["arg" + std::to_string(positional++)] = input;
      } else {
        s.params[input.substr(0, eq)] = input.substr(eq + 1);
      }
    }
    if (s.action == StageAction::kUseCredentials && !s.params.count("api_action")) {
      for (const auto& c : node->commands) {
        if (auto api = ApiActionFromCommand(c)) {
          s.params["api_action"] = *api;
          break;
        }
      }
    }
    std::string joined;
    for (const auto& c : node->commands) joined += (joined.empty() ? "" : ";;") + c;
    s.params["commands"] = joined;
    s.Validate();
    exp.stages.push_back(std::move(s));
  }
  exp.Validate();
  return exp;
}

nlohmann::json ToJson(const Stage& s) {
  nlohmann::json j = {{"name", s.name},
                      {"action", ActionName(s.action)},
                      {"params", s.params},
                      {"expected", s.expected}};
  if (s.source_node) j["source_node"] = *s.source_node;
  return j;
}

nlohmann::json ToJson(const SCEExperiment& e) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : e.stages) stages.push_back(ToJson(s));
  return {{"name", e.name},
          {"observability", e.observability},
          {"steady_state", {{"checks", e.steady_state}}},
          {"hypothesis", {{"text", e.hypothesis.text}, {"expect_finding", e.hypothesis.expect_finding}}},
          {"stages", stages},
          {"source_branch",
           {{"node_ids", e.source_branch.node_ids}, {"source_tree", e.source_branch.source_tree}}}};
}

SCEExperiment ExperimentFromJson(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ValidationError("experiment must be a mapping");
    SCEExperiment e;
    e.name = doc.at("name").get<std::string>();
    e.observability = ScalarText(doc.value("observability", nlohmann::json("")));
    const auto& ss = doc.at("steady_state");
    e.steady_state = (ss.is_object() ? ss.at("checks") : ss).get<std::vector<std::string>>();
    const auto& h = doc.at("hypothesis");
    e.hypothesis.text = h.value("text", "");
    e.hypothesis.expect_finding = h.at("expect_finding").get<std::string>();
    for (const auto& st : doc.at("stages")) {
      Stage s;
      s.name = st.at("name").get<std::string>();
      const std::string action = st.at("action").get<std::string>();
      auto a = ActionFromName(action);
      if (!a) throw ValidationError("unknown stage action '" + action + "'");
      s.action = *a;
      const auto params = st.value("params", nlohmann::json::object());
      for (const auto& [k, v] : params.items()) {
        s.params[k] = ScalarText(v);
      }
      s.expected = ScalarText(st.value("expected", nlohmann::json("")));
      if (st.contains("source_node")) s.source_node = st.at("source_node").get<std::string>();
      e.stages.push_back(std::move(s));
    }
    if (doc.contains("source_branch")) {
      const auto& b = doc.at("source_branch");
      e.source_branch.node_ids = b.value("node_ids", std::vector<std::string>{});
      e.source_branch.source_tree = b.value("source_tree", "");
    }
    e.Validate();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed experiment: ") + ex.what());
  }
}

SCEExperiment LoadExperiment(const std::filesystem::path& path) {
  return ExperimentFromJson(YamlTextToJson(ReadFile(path)));
}

}  // namespace adforge::sce
