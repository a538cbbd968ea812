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

#include "adforge/flow/session.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "adforge/adtree/branch.hpp"
#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/extract.hpp"

namespace adforge::flow {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 7> kPhaseNames = {{
    {Phase::kAppSecContext, "AppSecContext"},
    {Phase::kPromptContext, "PromptContext"},
    {Phase::kInsertPrompt, "InsertPrompt"},
    {Phase::kAttackContext, "AttackContext"},
    {Phase::kCosmeticContext, "CosmeticContext"},
    {Phase::kExpertValidation, "ExpertValidation"},
    {Phase::kDone, "Done"},
}};

bool Blank(const std::optional<std::string>& s) {
  return !s || s->find_first_not_of(" \t\r\n") == std::string::npos;
}

void RequirePhase(const FlowSession& s, std::initializer_list<Phase> allowed, std::string_view op) {
  if (std::find(allowed.begin(), allowed.end(), s.phase) != allowed.end()) return;
  throw IllegalTransition(std::string(op) + " is not allowed in phase " +
                          std::string(PhaseName(s.phase)));
}

bool IsGroundingPrompt(const std::string& text) {
  for (std::size_t i = 0; i < GroundingQuestions().size(); ++i) {
    if (text == RenderGroundingPrompt(i)) return true;
  }
  return false;
}

nlohmann::json CandidateJson(const Candidate& c) {
  nlohmann::json j = {{"dot", c.dot}, {"origin_phase", PhaseName(c.origin_phase)}};
  j["report"] = c.report ? metrics::ToJson(*c.report) : nlohmann::json(nullptr);
  j["component"] = c.component ? nlohmann::json(*c.component) : nlohmann::json(nullptr);
  return j;
}

Phase PhaseField(const nlohmann::json& j, const char* key) {
  auto p = PhaseFromName(j.at(key).get<std::string>());
  if (!p) throw ValidationError("unknown phase '" + j.at(key).get<std::string>() + "'");
  return *p;
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) return name;
  }
  return "AppSecContext";
}

std::optional<Phase> PhaseFromName(std::string_view name) {
  for (const auto& [p, n] : kPhaseNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

bool IsLegalTransition(Phase from, Phase to) {
  if (from == to) return true;
  switch (from) {
    case Phase::kAppSecContext:
      return to == Phase::kPromptContext;
    case Phase::kPromptContext:
      return to == Phase::kInsertPrompt;
    case Phase::kInsertPrompt:
      return to == Phase::kAttackContext;
    case Phase::kAttackContext:
      return to == Phase::kCosmeticContext || to == Phase::kExpertValidation ||
             to == Phase::kDone;
    case Phase::kCosmeticContext:
      // Refine passes through ExpertValidation back to AttackContext.
      return to == Phase::kAttackContext || to == Phase::kExpertValidation ||
             to == Phase::kDone;
    case Phase::kExpertValidation:
      return to == Phase::kAttackContext || to == Phase::kDone;
    case Phase::kDone:
      return false;
  }
  return false;
}

std::optional<Verdict> VerdictFromName(std::string_view name) {
  if (name == "accept" || name == "Accept") return Verdict::kAccept;
  if (name == "refine" || name == "Refine") return Verdict::kRefine;
  return std::nullopt;
}

nlohmann::json ToJson(const FlowSession& s) {
  nlohmann::json transcript = nlohmann::json::array();
  for (const auto& t : s.transcript) {
    transcript.push_back({{"role", RoleName(t.role)}, {"text", t.text}});
  }
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : s.candidates) candidates.push_back(CandidateJson(c));
  nlohmann::json j = {
      {"schema_version", kSessionSchemaVersion},
      {"id", s.id},
      {"phase", PhaseName(s.phase)},
      {"spec", s.spec ? ToJson(*s.spec) : nlohmann::json(nullptr)},
      {"transcript", transcript},
      {"candidates", candidates},
      {"accepted_tree",
       s.accepted_tree ? nlohmann::json(adtree::EmitDot(*s.accepted_tree)) : nlohmann::json(nullptr)},
      {"iteration_count", s.iteration_count},
  };
  return j;
}

FlowSession SessionFromJson(const nlohmann::json& j) {
  try {
    if (j.value("schema_version", "") != kSessionSchemaVersion) {
      throw ValidationError("unsupported session schema_version");
    }
    FlowSession s;
    s.id = j.at("id").get<std::string>();
    s.phase = PhaseField(j, "phase");
    if (!j.at("spec").is_null()) s.spec = PromptSpecFromJson(j.at("spec"));
    for (const auto& t : j.at("transcript")) {
      auto role = RoleFromName(t.at("role").get<std::string>());
      if (!role) throw ValidationError("unknown transcript role");
      s.transcript.push_back({*role, t.at("text").get<std::string>()});
    }
    for (const auto& c : j.at("candidates")) {
      Candidate cand;
      cand.dot = c.at("dot").get<std::string>();
      cand.tree = adtree::ParseDot(cand.dot);
      cand.origin_phase = PhaseField(c, "origin_phase");
      if (!c.at("report").is_null()) cand.report = metrics::MetricReportFromJson(c.at("report"));
      if (!c.at("component").is_null()) cand.component = c.at("component").get<std::string>();
      s.candidates.push_back(std::move(cand));
    }
    if (!j.at("accepted_tree").is_null()) {
      s.accepted_tree = adtree::ParseDot(j.at("accepted_tree").get<std::string>());
    }
    s.iteration_count = j.at("iteration_count").get<int>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed session document: ") + e.what());
  }
}

Orchestrator::Orchestrator(ChatBackend& backend, const metrics::TechniqueCatalog& catalog,
                           FlowOptions options)
    : backend_(backend), catalog_(catalog), options_(options) {}

FlowSession Orchestrator::CreateSession(const PromptSpec& spec, std::string id) const {
  spec.Validate();
  FlowSession s;
  s.id = std::move(id);
  s.spec = spec;
  return s;
}

std::vector<Message> Orchestrator::Context(const FlowSession& session,
                                           const std::string& next_user) const {
  std::vector<Message> out;
  out.reserve(session.transcript.size() + 1);
  bool after_grounding_prompt = false;
  for (const auto& t : session.transcript) {
    if (t.role == Role::kAssistant && after_grounding_prompt) {
      out.push_back({t.role, TruncateWords(t.text, options_.grounding_budget_words)});
    } else {
      out.push_back({t.role, t.text});
    }
    after_grounding_prompt = t.role == Role::kUser && IsGroundingPrompt(t.text);
  }
  out.push_back({Role::kUser, next_user});
  return out;
}

std::string Orchestrator::Ask(FlowSession& work, const std::string& prompt) {
  std::string reply = backend_.Complete(Context(work, prompt));
  work.transcript.push_back({Role::kUser, prompt});
  work.transcript.push_back({Role::kAssistant, reply});
  return reply;
}

Candidate Orchestrator::MakeCandidate(adtree::ADTree tree, Phase origin,
                                      std::optional<std::string> component) const {
  Candidate c;
  c.dot = adtree::EmitDot(tree);
  // Normalize through the emitter so the stored tree equals its reparse.
  c.tree = adtree::ParseDot(c.dot);
  c.origin_phase = origin;
  c.component = std::move(component);
  try {
    c.report = metrics::TreeScore(c.tree, catalog_, std::nullopt);
  } catch (const EmptyTree&) {
  }
  return c;
}

Candidate Orchestrator::Ingest(const FlowSession&, const std::string& reply, Phase origin,
                               std::optional<std::string> component) const {
  const auto blocks = ExtractDotBlocks(reply);
  if (blocks.empty()) throw NoDotFound();
  std::optional<CandidateRejected> first_error;
  for (const auto& block : blocks) {
    try {
      return MakeCandidate(adtree::ParseDot(block), origin, component);
    } catch (const ParseError& e) {
      if (!first_error) first_error.emplace(e.code(), e.what(), block);
    } catch (const StructureError& e) {
      if (!first_error) first_error.emplace(e.code(), e.what(), block);
    }
  }
  throw *first_error;
}

void Orchestrator::RunGrounding(FlowSession& session) {
  RequirePhase(session, {Phase::kAppSecContext}, "grounding");
  const auto& questions = GroundingQuestions();
  std::size_t answered = 0;
  for (const auto& t : session.transcript) {
    if (t.role == Role::kAssistant) ++answered;
  }
  for (std::size_t k = answered; k < questions.size(); ++k) {
    FlowSession work = session;
    Ask(work, RenderGroundingPrompt(k));
    session = std::move(work);
  }
  session.phase = Phase::kPromptContext;
}

FlowSession Orchestrator::StartSession(const PromptSpec& spec, std::string id) {
  FlowSession s = CreateSession(spec, std::move(id));
  RunGrounding(s);
  return s;
}

void Orchestrator::InsertPrompt(FlowSession& session) {
  RequirePhase(session, {Phase::kPromptContext}, "insert_prompt");
  FlowSession work = session;
  const std::string reply = Ask(work, RenderInsertPrompt(*work.spec));
  try {
    work.candidates.push_back(Ingest(work, reply, Phase::kInsertPrompt, std::nullopt));
  } catch (const NoDotFound&) {
  } catch (const CandidateRejected&) {
  }
  work.phase = Phase::kInsertPrompt;
  session = std::move(work);
}

const Candidate& Orchestrator::RequestBranch(FlowSession& session, BranchMode mode,
                                             const std::optional<std::string>& component,
                                             const std::optional<std::string>& resource_doc) {
  if (mode == BranchMode::kSpecific && Blank(resource_doc)) {
    throw ValidationError("a specific branch request needs resource_doc");
  }
  RequirePhase(session, {Phase::kInsertPrompt, Phase::kAttackContext}, "request_branch");
  if (component) {
    const auto& comps = session.spec->components;
    if (std::none_of(comps.begin(), comps.end(),
                     [&](const Component& c) { return c.technology == *component; })) {
      throw ValidationError("'" + *component + "' is not a component of the session spec");
    }
  }
  FlowSession work = session;
  const std::string reply =
      Ask(work, RenderBranchPrompt(*work.spec, mode, component, resource_doc));
  Candidate cand;
  try {
    cand = Ingest(work, reply, Phase::kAttackContext, component);
  } catch (...) {
    session.transcript = std::move(work.transcript);
    throw;
  }
  work.candidates.push_back(std::move(cand));
  ++work.iteration_count;
  work.phase = Phase::kAttackContext;
  session = std::move(work);
  return session.candidates.back();
}

const Candidate& Orchestrator::MergeComponents(FlowSession& session) {
  RequirePhase(session, {Phase::kAttackContext}, "merge_components");
  std::vector<adtree::ADTree> parts;
  for (const auto& comp : session.spec->components) {
    for (auto it = session.candidates.rbegin(); it != session.candidates.rend(); ++it) {
      if (it->component == comp.technology) {
        parts.push_back(it->tree);
        break;
      }
    }
  }
  if (parts.empty()) throw PreconditionError("no per-component candidates to merge");
  Candidate merged = MakeCandidate(adtree::MergeTrees(parts, session.spec->tree_root),
                                   Phase::kAttackContext, std::nullopt);
  session.candidates.push_back(std::move(merged));
  return session.candidates.back();
}

const Candidate& Orchestrator::ApplyCosmetics(FlowSession& session,
                                              const std::optional<adtree::StyleSheet>& style,
                                              const std::optional<std::string>& restructure) {
  if ((!style || style->empty()) && Blank(restructure)) {
    throw ValidationError("cosmetics need a stylesheet or a restructure instruction");
  }
  if (session.candidates.empty()) throw PreconditionError("no candidate tree to adjust");
  RequirePhase(session, {Phase::kAttackContext, Phase::kCosmeticContext}, "apply_cosmetics");
  FlowSession work = session;
  if (style && !style->empty()) {
    work.candidates.push_back(MakeCandidate(
        adtree::ApplyStyleSheet(work.candidates.back().tree, *style), Phase::kCosmeticContext,
        work.candidates.back().component));
  }
  if (!Blank(restructure)) {
    const std::string reply =
        Ask(work, RenderRestructurePrompt(work.candidates.back().dot, *restructure));
    Candidate cand;
    try {
      cand = Ingest(work, reply, Phase::kCosmeticContext, std::nullopt);
    } catch (...) {
      session.transcript = std::move(work.transcript);
      throw;
    }
    work.candidates.push_back(std::move(cand));
  }
  work.phase = Phase::kCosmeticContext;
  session = std::move(work);
  return session.candidates.back();
}

void Orchestrator::SubmitValidation(FlowSession& session, Verdict verdict,
                                    const std::optional<std::string>& feedback) {
  if (verdict == Verdict::kRefine && Blank(feedback)) {
    throw ValidationError("refine needs feedback text");
  }
  if (session.candidates.empty()) throw PreconditionError("no candidate tree to validate");
  RequirePhase(session,
               {Phase::kAttackContext, Phase::kCosmeticContext, Phase::kExpertValidation},
               "submit_validation");
  FlowSession work = session;
  if (verdict == Verdict::kAccept) {
    work.accepted_tree = work.candidates.back().tree;
    work.phase = Phase::kDone;
    session = std::move(work);
    return;
  }
  const std::string reply = Ask(work, RenderRefinePrompt(work.candidates.back().dot, *feedback));
  Candidate cand;
  try {
    cand = Ingest(work, reply, Phase::kExpertValidation, std::nullopt);
  } catch (...) {
    session.transcript = std::move(work.transcript);
    session.phase = Phase::kExpertValidation;
    throw;
  }
  work.candidates.push_back(std::move(cand));
  ++work.iteration_count;
  work.phase = Phase::kAttackContext;
  session = std::move(work);
}

std::string RandomSessionId() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static const char* hex = "0123456789abcdef";
  std::uint64_t v = rng();
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = hex[v & 0xF];
  return out;
}

}  // namespace adforge::flow
