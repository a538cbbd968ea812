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

#include "adforge/sce/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <random>
#include <regex>

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::sce {

namespace {

constexpr const char* kRequestSpot = "ec2:RequestSpotInstances";
constexpr const char* kPassRole = "iam:PassRole";

std::string Hex(std::uint64_t v, std::size_t digits, bool upper) {
  const char* alphabet = upper ? "0123456789ABCDEF" : "0123456789abcdef";
  std::string out(digits, '0');
  for (std::size_t i = digits; i-- > 0; v >>= 4) out[i] = alphabet[v & 0xF];
  return out;
}

class Simulation {
 public:
  Simulation(MockCloudState state, const DetectorConfig& detector, std::uint64_t seed)
      : state_(std::move(state)), detector_(detector), rng_(seed) {
    for (const auto& rule : detector_.rules) {
      compiled_.emplace_back(rule.pattern ? std::optional<std::regex>(std::regex(*rule.pattern))
                                          : std::nullopt);
    }
  }

  StageResult Run(const Stage& stage) {
    StageResult r{stage.name, stage.action, StageStatus::kSuccess, ""};
    switch (stage.action) {
      case StageAction::kCheckFindings:
        if (state_.findings.empty()) {
          r.observed = "no findings present";
        } else {
          r.status = StageStatus::kBlocked;
          r.observed = std::to_string(state_.findings.size()) + " prior finding(s) present";
        }
        break;
      case StageAction::kCreateSpotInstance:
        CreateSpot(stage, r);
        break;
      case StageAction::kStartListener: {
        auto it = stage.params.find("listener_port");
        r.observed = "listener armed" +
                     (it == stage.params.end() ? std::string() : " on port " + it->second) +
                     " (simulated; no socket opened)";
        break;
      }
      case StageAction::kExtractCredentials:
        Extract(r);
        break;
      case StageAction::kUseCredentials:
        Use(stage, r);
        break;
      case StageAction::kCustom:
        r.status = StageStatus::kError;
        r.observed = "custom commands are not simulated";
        break;
    }
    return r;
  }

  const std::vector<Finding>& emitted() const { return emitted_; }
  MockCloudState& state() { return state_; }

 private:
  void CreateSpot(const Stage& stage, StageResult& r) {
    const std::string& role = stage.params.at("role_name");
    const std::string& user_data = stage.params.at("user_data_base64");
    ApiEvent ev{kRequestSpot, false, {{"role_name", role}, {"user_data", user_data}}};
    ev.fields["user_data_decoded"] = DecodeBase64(user_data).value_or("");
    const bool can_spot = Grants(state_.principal_permissions, kRequestSpot);
    const bool can_pass = Grants(state_.principal_permissions, kPassRole);
    if (!can_spot || !can_pass) {
      r.status = StageStatus::kBlocked;
      r.observed = std::string("AccessDenied: principal lacks ") + (can_spot ? kPassRole : kRequestSpot);
    } else if (!state_.roles.count(role)) {
      r.status = StageStatus::kError;
      r.observed = "NoSuchEntity: role " + role + " does not exist";
    } else {
      Instance inst{"i-" + Hex(rng_(), 17, false), role, user_data};
      ev.success = true;
      ev.fields["instance_id"] = inst.id;
      r.observed = "spot request fulfilled; instance " + inst.id + " launched with role " + role;
      state_.instances.push_back(std::move(inst));
    }
    Observe(ev);
  }

  void Extract(StageResult& r) {
    if (state_.instances.empty()) {
      r.status = StageStatus::kError;
      r.observed = "no instance to read metadata credentials from";
      return;
    }
    const Instance& inst = state_.instances.back();
    Role& role = state_.roles.at(inst.role_name);
    if (!role.credentials) {
      role.credentials = Credentials{"ASIA" + Hex(rng_(), 16, true), Hex(rng_(), 16, false) +
                                     Hex(rng_(), 16, false), Hex(rng_(), 16, false),
                                     "logical+3600"};
    }
    stolen_role_ = inst.role_name;
    r.observed = "temporary credentials " + role.credentials->key_id + " obtained for role " +
                 inst.role_name;
    Observe({"imds:GetSecurityCredentials", true,
             {{"role_name", inst.role_name}, {"instance_id", inst.id}}});
  }

  void Use(const Stage& stage, StageResult& r) {
    const std::string& action = stage.params.at("api_action");
    const std::vector<std::string>& perms =
        stolen_role_ ? state_.roles.at(*stolen_role_).permissions : state_.principal_permissions;
    const std::string who = stolen_role_ ? "role " + *stolen_role_ : std::string("principal");
    ApiEvent ev{action, Grants(perms, action),
                {{"credential_source", stolen_role_ ? "instance" : "principal"}}};
    if (stolen_role_) ev.fields["role_name"] = *stolen_role_;
    if (ev.success) {
      r.observed = action + " succeeded as " + who;
    } else {
      r.status = StageStatus::kBlocked;
      r.observed = "AccessDenied: " + who + " is not allowed " + action;
    }
    Observe(ev);
  }

  void Observe(const ApiEvent& ev) {
    const std::int64_t now = ++clock_;
    if (!state_.detector_enabled) return;
    for (std::size_t i = 0; i < detector_.rules.size(); ++i) {
      const auto& rule = detector_.rules[i];
      if (rule.event != ev.action) continue;
      if (rule.on_success_only && !ev.success) continue;
      if (rule.field) {
        auto it = ev.fields.find(*rule.field);
        if (it == ev.fields.end()) continue;
        if (compiled_[i] && !std::regex_search(it->second, *compiled_[i])) continue;
      }
      Finding f{rule.finding_type, rule.severity, now};
      state_.findings.push_back(f);
      emitted_.push_back(std::move(f));
    }
  }

  MockCloudState state_;
  const DetectorConfig& detector_;
  std::vector<std::optional<std::regex>> compiled_;
  std::mt19937_64 rng_;
  std::int64_t clock_ = 0;
  std::optional<std::string> stolen_role_;
  std::vector<Finding> emitted_;
};

}  // namespace

void DetectorConfig::Validate() const {
  for (const auto& r : rules) {
    if (r.event.empty()) throw ValidationError("detector rule '" + r.name + "' needs an event");
    if (!IsKnownFindingType(r.finding_type)) {
      throw ValidationError("detector rule '" + r.name + "' raises unknown finding type '" +
                            r.finding_type + "'");
    }
    if (r.pattern && !r.field) {
      throw ValidationError("detector rule '" + r.name + "' has a pattern but no field");
    }
    if (r.pattern) {
      try {
        std::regex re(*r.pattern);
      } catch (const std::regex_error&) {
        throw ValidationError("detector rule '" + r.name + "' has an invalid pattern");
      }
    }
  }
}

DetectorConfig DetectorFromJson(const nlohmann::json& doc) {
  DetectorConfig cfg;
  if (doc.is_null()) return cfg;
  try {
    const auto& rules = doc.is_array() ? doc : doc.value("rules", nlohmann::json::array());
    for (const auto& r : rules) {
      DetectorRule rule;
      rule.name = r.value("name", "");
      rule.event = r.at("event").get<std::string>();
      if (r.contains("field")) rule.field = r.at("field").get<std::string>();
      if (r.contains("pattern")) rule.pattern = r.at("pattern").get<std::string>();
      rule.finding_type = r.at("finding_type").get<std::string>();
      rule.severity = r.value("severity", rule.severity);
      const std::string on = r.value("on", "success");
      if (on != "success" && on != "any") {
        throw ValidationError("detector rule '" + rule.name + "': 'on' must be success or any");
      }
      rule.on_success_only = on == "success";
      cfg.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed detector config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

DetectorConfig LoadDetector(const std::filesystem::path& path) {
  return DetectorFromJson(YamlTextToJson(ReadFile(path)));
}

nlohmann::json ToJson(const DetectorConfig& cfg) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : cfg.rules) {
    nlohmann::json j = {{"name", r.name},
                        {"event", r.event},
                        {"finding_type", r.finding_type},
                        {"severity", r.severity},
                        {"on", r.on_success_only ? "success" : "any"}};
    if (r.field) j["field"] = *r.field;
    if (r.pattern) j["pattern"] = *r.pattern;
    rules.push_back(j);
  }
  return {{"rules", rules}};
}

std::string_view StatusName(StageStatus s) {
  switch (s) {
    case StageStatus::kSuccess:
      return "Success";
    case StageStatus::kBlocked:
      return "Blocked";
    case StageStatus::kError:
      return "Error";
  }
  return "Error";
}

std::string_view VerdictName(HypothesisVerdict v) {
  switch (v) {
    case HypothesisVerdict::kConfirmed:
      return "Confirmed";
    case HypothesisVerdict::kRefuted:
      return "Refuted";
    case HypothesisVerdict::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

HypothesisVerdict DecideVerdict(const std::vector<StageResult>& results, std::size_t planned,
                                const std::vector<Finding>& emitted, const std::string& expected) {
  if (std::any_of(emitted.begin(), emitted.end(),
                  [&](const Finding& f) { return f.type == expected; })) {
    return HypothesisVerdict::kConfirmed;
  }
  const bool all_ok =
      results.size() == planned && std::all_of(results.begin(), results.end(), [](const auto& r) {
        return r.status == StageStatus::kSuccess;
      });
  return all_ok ? HypothesisVerdict::kRefuted : HypothesisVerdict::kInconclusive;
}

ExperimentReport RunExperiment(const SCEExperiment& exp, const MockCloudState& initial,
                               const DetectorConfig& detector, std::uint64_t seed) {
  return RunExperiment(exp, initial, detector, seed, nullptr);
}

ExperimentReport RunExperiment(const SCEExperiment& exp, const MockCloudState& initial,
                               const DetectorConfig& detector, std::uint64_t seed,
                               MockCloudState* final_state) {
  exp.Validate();
  initial.Validate();
  detector.Validate();

  ExperimentReport report;
  report.experiment = exp.name;
  report.seed = seed;
  report.expected_finding = exp.hypothesis.expect_finding;
  report.steady_state_before = CheckSteadyState(initial, exp.steady_state);

  Simulation sim(initial, detector, seed);
  const bool steady = std::all_of(report.steady_state_before.begin(),
                                  report.steady_state_before.end(),
                                  [](const auto& kv) { return kv.second; });
  if (steady) {
    for (const auto& stage : exp.stages) {
      report.stage_results.push_back(sim.Run(stage));
      if (report.stage_results.back().status != StageStatus::kSuccess) break;
    }
  }
  report.detector_findings_emitted = sim.emitted();
  report.verdict = DecideVerdict(report.stage_results, exp.stages.size(),
                                 report.detector_findings_emitted, report.expected_finding);
  if (final_state) *final_state = sim.state();
  return report;
}

nlohmann::json ToJson(const ExperimentReport& r) {
  nlohmann::json steady = nlohmann::json::array();
  for (const auto& [name, pass] : r.steady_state_before) {
    steady.push_back({{"check", name}, {"result", pass ? "pass" : "fail"}});
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stage_results) {
    stages.push_back({{"name", s.name},
                      {"action", ActionName(s.action)},
                      {"status", StatusName(s.status)},
                      {"observed", s.observed}});
  }
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : r.detector_findings_emitted) {
    findings.push_back({{"type", f.type}, {"severity", f.severity}, {"timestamp", f.timestamp}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"experiment", r.experiment},
          {"seed", r.seed},
          {"steady_state_before", steady},
          {"stage_results", stages},
          {"detector_findings_emitted", findings},
          {"expected_finding", r.expected_finding},
          {"hypothesis_verdict", VerdictName(r.verdict)}};
}

std::optional<std::string> DecodeBase64(const std::string& text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.size() % 4 != 0) return std::nullopt;
  if (clean.empty()) return std::string();
  std::string out(clean.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) return std::nullopt;
  std::size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace adforge::sce
