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

#include "adforge/flow/prompt.hpp"

#include <sstream>

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::flow {

namespace {

bool Blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string RequireString(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("prompt spec is missing '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> StringList(const nlohmann::json& v, const std::string& what) {
  std::vector<std::string> out;
  if (v.is_null()) return out;
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ValidationError("'" + what + "' must be a list of strings");
  for (const auto& item : v) {
    if (!item.is_string()) throw ValidationError("'" + what + "' must be a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

constexpr const char* kAnswerWithDot =
    "Answer with a single fenced code block tagged dot that contains one Graphviz digraph. "
    "Mark every node with an adtkind attribute (root, service, attack, defense or goal). "
    "On attack nodes set mitre to the ATT&CK technique id, cmd to the commands to run "
    "(separate several with ;;), inputs to the required arguments as key=value pairs "
    "(separated with ;;), expect to the expected result and step to the position of the "
    "step in the attack.";

void WriteComponents(std::ostringstream& out, const PromptSpec& spec) {
  for (const auto& c : spec.components) {
    out << "- " << c.technology;
    if (!c.safeguards.empty()) {
      out << " (safeguards: ";
      for (std::size_t i = 0; i < c.safeguards.size(); ++i) {
        if (i) out << "; ";
        out << c.safeguards[i];
      }
      out << ")";
    }
    out << "\n";
  }
}

}  // namespace

void PromptSpec::Validate() const {
  if (Blank(system_context)) throw ValidationError("system_context must be non-empty");
  if (components.empty()) throw ValidationError("components must list at least one component");
  for (const auto& c : components) {
    if (Blank(c.technology)) throw ValidationError("component technology must be non-empty");
    for (const auto& s : c.safeguards) {
      if (Blank(s)) throw ValidationError("safeguard of '" + c.technology + "' is empty");
    }
  }
  if (attack_goals.empty()) throw ValidationError("attack_goals must list at least one goal");
  for (const auto& g : attack_goals) {
    if (Blank(g)) throw ValidationError("attack goal must be non-empty");
  }
  if (Blank(tree_root)) throw ValidationError("tree_root must be non-empty");
}

PromptSpec PromptSpecFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("prompt spec must be a mapping");
  PromptSpec spec;
  spec.system_context = RequireString(doc, "system_context");
  spec.tree_root = RequireString(doc, "tree_root");
  if (doc.contains("components")) {
    const auto& comps = doc.at("components");
    if (!comps.is_array()) throw ValidationError("'components' must be a list");
    for (const auto& c : comps) {
      Component comp;
      if (c.is_string()) {
        comp.technology = c.get<std::string>();
      } else if (c.is_object()) {
        comp.technology = RequireString(c, "technology");
        if (c.contains("safeguards")) comp.safeguards = StringList(c.at("safeguards"), "safeguards");
      } else {
        throw ValidationError("component must be a string or a mapping");
      }
      spec.components.push_back(std::move(comp));
    }
  }
  if (doc.contains("attack_goals")) spec.attack_goals = StringList(doc.at("attack_goals"), "attack_goals");
  spec.Validate();
  return spec;
}

PromptSpec PromptSpecFromText(const std::string& text) {
  return PromptSpecFromJson(YamlTextToJson(text));
}

PromptSpec LoadPromptSpec(const std::filesystem::path& path) {
  return PromptSpecFromText(ReadFile(path));
}

nlohmann::json ToJson(const PromptSpec& spec) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : spec.components) {
    comps.push_back({{"technology", c.technology}, {"safeguards", c.safeguards}});
  }
  return {{"system_context", spec.system_context},
          {"components", comps},
          {"attack_goals", spec.attack_goals},
          {"tree_root", spec.tree_root}};
}

std::string_view BranchModeName(BranchMode mode) {
  return mode == BranchMode::kGeneralized ? "generalized" : "specific";
}

std::optional<BranchMode> BranchModeFromName(std::string_view name) {
  if (name == "generalized" || name == "Generalized") return BranchMode::kGeneralized;
  if (name == "specific" || name == "Specific") return BranchMode::kSpecific;
  return std::nullopt;
}

const std::vector<std::string>& GroundingQuestions() {
  static const std::vector<std::string> q = {
      "What is application security?",
      "What is threat modeling?",
      "What is threat modeling using attack trees?",
  };
  return q;
}

std::string RenderGroundingPrompt(std::size_t index) {
  return GroundingQuestions().at(index) + " Please keep the answer to a short summary.";
}

std::string RenderInsertPrompt(const PromptSpec& spec) {
  std::ostringstream out;
  out << "Using what we discussed about application security and attack trees, build an "
         "attack-defense tree for the system below.\n\n";
  out << "System Context:\n" << spec.system_context << "\n\n";
  out << "Component List:\n";
  WriteComponents(out, spec);
  out << "\nAttack Goals:\n";
  for (const auto& g : spec.attack_goals) out << "- " << g << "\n";
  out << "\nTree Root:\n" << spec.tree_root << "\n\n";
  out << kAnswerWithDot << "\n";
  return out.str();
}

std::string RenderBranchPrompt(const PromptSpec& spec, BranchMode mode,
                               const std::optional<std::string>& component,
                               const std::optional<std::string>& resource_doc) {
  std::ostringstream out;
  const std::string scope =
      component ? "the component " + *component : std::string("the whole system");
  if (mode == BranchMode::kGeneralized) {
    out << "Generate the attack-defense branches for " << scope
        << ". Derive the attacks from the system context, the components and their "
           "safeguards, and the attack goals given earlier.\n";
  } else {
    out << "Generate a specific attack-defense branch for " << scope
        << " that follows the attack documented in the resource below step by step.\n\n";
    out << "Resource:\n" << resource_doc.value_or("") << "\n";
  }
  out << "\nAttack Goals:\n";
  for (const auto& g : spec.attack_goals) out << "- " << g << "\n";
  out << "\nUse \"" << spec.tree_root << "\" as the label of the root node. " << kAnswerWithDot
      << "\n";
  return out.str();
}

std::string RenderRestructurePrompt(const std::string& dot, const std::string& instruction) {
  std::ostringstream out;
  out << "Here is the current attack-defense tree in DOT format.\n\n```dot\n"
      << dot << "```\n\nChange the structure of the tree as follows: " << instruction
      << "\nKeep every annotation that is not affected. " << kAnswerWithDot << "\n";
  return out.str();
}

std::string RenderRefinePrompt(const std::string& dot, const std::string& feedback) {
  std::ostringstream out;
  out << "A security analyst reviewed this attack-defense tree.\n\n```dot\n"
      << dot << "```\n\nAnalyst feedback: " << feedback
      << "\nReturn the corrected tree. " << kAnswerWithDot << "\n";
  return out.str();
}

std::string TruncateWords(const std::string& text, std::size_t budget) {
  std::istringstream in(text);
  std::string word;
  std::string out;
  std::size_t count = 0;
  bool cut = false;
  while (in >> word) {
    if (count == budget) {
      cut = true;
      break;
    }
    if (count) out += ' ';
    out += word;
    ++count;
  }
  if (cut) out += " ...";
  return out;
}

}  // namespace adforge::flow
