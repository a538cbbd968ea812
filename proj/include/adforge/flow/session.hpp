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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adforge/adtree/model.hpp"
#include "adforge/flow/backend.hpp"
#include "adforge/flow/prompt.hpp"
#include "adforge/metrics/metrics.hpp"

namespace adforge::flow {

enum class Phase {
  kAppSecContext,
  kPromptContext,
  kInsertPrompt,
  kAttackContext,
  kCosmeticContext,
  kExpertValidation,
  kDone,
};

std::string_view PhaseName(Phase phase);
std::optional<Phase> PhaseFromName(std::string_view name);

// Edges of the phase machine, including self-loops.
bool IsLegalTransition(Phase from, Phase to);

struct Turn {
  Role role;
  std::string text;

  bool operator==(const Turn&) const = default;
};

struct Candidate {
  adtree::ADTree tree;
  // Canonical DOT of `tree`.
  std::string dot;
  Phase origin_phase;
  std::optional<metrics::MetricReport> report;
  // Spec component the candidate answers, for per-component branches.
  std::optional<std::string> component;

  bool operator==(const Candidate&) const = default;
};

struct FlowSession {
  std::string id;
  Phase phase = Phase::kAppSecContext;
  std::optional<PromptSpec> spec;
  std::vector<Turn> transcript;
  std::vector<Candidate> candidates;
  std::optional<adtree::ADTree> accepted_tree;
  int iteration_count = 0;

  bool operator==(const FlowSession&) const = default;
};

inline constexpr const char* kSessionSchemaVersion = "1";

nlohmann::json ToJson(const FlowSession& session);
FlowSession SessionFromJson(const nlohmann::json& doc);

enum class Verdict { kAccept, kRefine };
std::optional<Verdict> VerdictFromName(std::string_view name);

struct FlowOptions {
  // Word budget for grounding answers carried into later prompts.
  std::size_t grounding_budget_words = 120;
};

// Drives sessions through the phase machine. Every operation either commits
// fully or leaves the session untouched, with two exceptions: grounding
// commits each answered question as it goes (so a failed start can resume),
// and a reply with no usable DOT keeps its transcript turns while adding no
// candidate.
class Orchestrator {
 public:
  Orchestrator(ChatBackend& backend, const metrics::TechniqueCatalog& catalog,
               FlowOptions options = {});

  FlowSession CreateSession(const PromptSpec& spec, std::string id) const;
  // Asks the remaining grounding questions, then moves to PromptContext.
  void RunGrounding(FlowSession& session);
  FlowSession StartSession(const PromptSpec& spec, std::string id);

  // PromptContext -> InsertPrompt. A DOT block in the reply, if valid,
  // becomes the first candidate.
  void InsertPrompt(FlowSession& session);
  const Candidate& RequestBranch(FlowSession& session, BranchMode mode,
                                 const std::optional<std::string>& component,
                                 const std::optional<std::string>& resource_doc);
  // Merges the latest candidate of each component under the spec's root.
  const Candidate& MergeComponents(FlowSession& session);
  const Candidate& ApplyCosmetics(FlowSession& session,
                                  const std::optional<adtree::StyleSheet>& style,
                                  const std::optional<std::string>& restructure);
  void SubmitValidation(FlowSession& session, Verdict verdict,
                        const std::optional<std::string>& feedback);

  // Conversation as sent to the backend: the transcript with grounding
  // answers truncated, plus `next_user` as the final turn.
  std::vector<Message> Context(const FlowSession& session, const std::string& next_user) const;

 private:
  std::string Ask(FlowSession& work, const std::string& prompt);
  Candidate Ingest(const FlowSession& work, const std::string& reply, Phase origin,
                   std::optional<std::string> component) const;
  Candidate MakeCandidate(adtree::ADTree tree, Phase origin,
                          std::optional<std::string> component) const;

  ChatBackend& backend_;
  const metrics::TechniqueCatalog& catalog_;
  FlowOptions options_;
};

// 16 lowercase hex characters from std::random_device.
std::string RandomSessionId();

}  // namespace adforge::flow
