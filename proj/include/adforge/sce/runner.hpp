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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "adforge/sce/cloud.hpp"
#include "adforge/sce/experiment.hpp"

namespace adforge::sce {

// An API call observed by the detector.
struct ApiEvent {
  std::string action;
  bool success = false;
  std::map<std::string, std::string> fields;
};

struct DetectorRule {
  std::string name;
  std::string event;
  // Field to match; `user_data_decoded` is the Base64-decoded user data.
  std::optional<std::string> field;
  std::optional<std::string> pattern;  // ECMAScript regex, searched
  std::string finding_type;
  std::string severity = "High";
  bool on_success_only = true;
};

struct DetectorConfig {
  std::vector<DetectorRule> rules;

  // Throws ValidationError on unknown finding types or bad regexes.
  void Validate() const;
};

DetectorConfig DetectorFromJson(const nlohmann::json& doc);
DetectorConfig LoadDetector(const std::filesystem::path& path);
nlohmann::json ToJson(const DetectorConfig& cfg);

enum class StageStatus { kSuccess, kBlocked, kError };
enum class HypothesisVerdict { kConfirmed, kRefuted, kInconclusive };

std::string_view StatusName(StageStatus s);
std::string_view VerdictName(HypothesisVerdict v);

struct StageResult {
  std::string name;
  StageAction action;
  StageStatus status;
  std::string observed;
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, bool>> steady_state_before;
  std::vector<StageResult> stage_results;
  std::vector<Finding> detector_findings_emitted;
  std::string expected_finding;
  HypothesisVerdict verdict = HypothesisVerdict::kInconclusive;
};

// Verdict rule: Confirmed iff the expected finding was emitted; Refuted iff
// every planned stage ran and succeeded without it; Inconclusive otherwise.
HypothesisVerdict DecideVerdict(const std::vector<StageResult>& results, std::size_t planned,
                                const std::vector<Finding>& emitted, const std::string& expected);

// Runs against a private copy of `initial`. Deterministic in all arguments.
ExperimentReport RunExperiment(const SCEExperiment& exp, const MockCloudState& initial,
                               const DetectorConfig& detector, std::uint64_t seed);

// Same as RunExperiment, also returning the final simulated state.
ExperimentReport RunExperiment(const SCEExperiment& exp, const MockCloudState& initial,
                               const DetectorConfig& detector, std::uint64_t seed,
                               MockCloudState* final_state);

inline constexpr const char* kReportSchemaVersion = "1";
nlohmann::json ToJson(const ExperimentReport& report);

// Decodes standard Base64; returns nullopt on malformed input.
std::optional<std::string> DecodeBase64(const std::string& text);

}  // namespace adforge::sce
