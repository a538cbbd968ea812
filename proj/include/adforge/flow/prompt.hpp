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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace adforge::flow {

struct Component {
  std::string technology;
  std::vector<std::string> safeguards;

  bool operator==(const Component&) const = default;
};

// The four parameters of the structured insert prompt.
struct PromptSpec {
  std::string system_context;
  std::vector<Component> components;
  std::vector<std::string> attack_goals;
  std::string tree_root;

  // Throws ValidationError naming the first empty or missing field.
  void Validate() const;

  bool operator==(const PromptSpec&) const = default;
};

// Accepts YAML or JSON (YAML is a superset). Throws IoError / ValidationError.
PromptSpec LoadPromptSpec(const std::filesystem::path& path);
PromptSpec PromptSpecFromText(const std::string& text);
nlohmann::json ToJson(const PromptSpec& spec);
PromptSpec PromptSpecFromJson(const nlohmann::json& doc);

enum class BranchMode { kGeneralized, kSpecific };

std::string_view BranchModeName(BranchMode mode);
std::optional<BranchMode> BranchModeFromName(std::string_view name);

// Grounding questions sent before any tree is requested.
const std::vector<std::string>& GroundingQuestions();
std::string RenderGroundingPrompt(std::size_t index);

std::string RenderInsertPrompt(const PromptSpec& spec);
std::string RenderBranchPrompt(const PromptSpec& spec, BranchMode mode,
                               const std::optional<std::string>& component,
                               const std::optional<std::string>& resource_doc);
std::string RenderRestructurePrompt(const std::string& dot, const std::string& instruction);
std::string RenderRefinePrompt(const std::string& dot, const std::string& feedback);

// Keeps the first `budget` whitespace-separated words; appends " ..." when
// anything was cut.
std::string TruncateWords(const std::string& text, std::size_t budget);

}  // namespace adforge::flow
