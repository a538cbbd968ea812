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

#include "adforge/sce/cloud.hpp"

#include <algorithm>
#include <set>

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::sce {

namespace {

std::vector<std::string> Strings(const nlohmann::json& doc, const char* key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_array()) throw ValidationError(std::string("'") + key + "' must be a list");
  for (const auto& v : doc.at(key)) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

void MockCloudState::Validate() const {
  std::set<std::string> ids;
  for (const auto& inst : instances) {
    if (!ids.insert(inst.id).second) throw ValidationError("duplicate instance id " + inst.id);
    if (!roles.count(inst.role_name)) {
      throw ValidationError("instance " + inst.id + " names unknown role " + inst.role_name);
    }
  }
}

nlohmann::json ToJson(const MockCloudState& s) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : s.findings) {
    findings.push_back({{"type", f.type}, {"severity", f.severity}, {"timestamp", f.timestamp}});
  }
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& i : s.instances) {
    instances.push_back({{"id", i.id}, {"role_name", i.role_name}, {"user_data", i.user_data}});
  }
  nlohmann::json roles = nlohmann::json::object();
  for (const auto& [name, r] : s.roles) {
    nlohmann::json role = {{"permissions", r.permissions}};
    if (r.credentials) {
      role["credentials"] = {{"key_id", r.credentials->key_id},
                             {"secret", r.credentials->secret},
                             {"token", r.credentials->token},
                             {"expiry", r.credentials->expiry}};
    }
    roles[name] = role;
  }
  return {{"findings", findings},
          {"instances", instances},
          {"roles", roles},
          {"principal_permissions", s.principal_permissions},
          {"detector_enabled", s.detector_enabled}};
}

MockCloudState StateFromJson(const nlohmann::json& doc) {
  try {
    MockCloudState s;
    for (const auto& f : doc.value("findings", nlohmann::json::array())) {
      s.findings.push_back({f.at("type").get<std::string>(), f.value("severity", "Medium"),
                            f.value("timestamp", std::int64_t{0})});
    }
    for (const auto& i : doc.value("instances", nlohmann::json::array())) {
      s.instances.push_back({i.at("id").get<std::string>(), i.at("role_name").get<std::string>(),
                             i.value("user_data", "")});
    }
    const auto roles = doc.value("roles", nlohmann::json::object());
    for (const auto& [name, r] : roles.items()) {
      Role role;
      role.permissions = Strings(r, "permissions");
      if (r.contains("credentials") && !r.at("credentials").is_null()) {
        const auto& c = r.at("credentials");
        role.credentials = Credentials{c.at("key_id").get<std::string>(), c.value("secret", ""),
                                       c.value("token", ""), c.value("expiry", "")};
      }
      s.roles.emplace(name, std::move(role));
    }
    s.principal_permissions = Strings(doc, "principal_permissions");
    s.detector_enabled = doc.value("detector_enabled", true);
    s.Validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed cloud state: ") + e.what());
  }
}

MockCloudState LoadState(const std::filesystem::path& path) {
  return StateFromJson(YamlTextToJson(ReadFile(path)));
}

bool Grants(const std::vector<std::string>& granted, const std::string& action) {
  const auto colon = action.find(':');
  const std::string service_wildcard =
      colon == std::string::npos ? std::string() : action.substr(0, colon) + ":*";
  for (const auto& g : granted) {
    if (g == action || g == "*") return true;
    if (!service_wildcard.empty() && g == service_wildcard) return true;
  }
  return false;
}

std::vector<std::pair<std::string, bool>> CheckSteadyState(const MockCloudState& state,
                                                           const std::vector<std::string>& checks) {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& name : checks) {
    bool pass;
    if (name == kCheckFindingsEmpty) {
      pass = state.findings.empty();
    } else if (name == kCheckNoOverprivilegedRoles) {
      pass = std::none_of(state.roles.begin(), state.roles.end(), [](const auto& kv) {
        const auto& p = kv.second.permissions;
        return std::find(p.begin(), p.end(), "*") != p.end();
      });
    } else if (name == kCheckDetectorEnabled) {
      pass = state.detector_enabled;
    } else {
      throw UnknownCheck(name);
    }
    out.emplace_back(name, pass);
  }
  return out;
}

const std::vector<std::string>& KnownFindingTypes() {
  static const std::vector<std::string> types = {
      "PrivilegeEscalation:EC2/SpotInstanceSuspiciousUserData",
      "UnauthorizedAccess:IAMUser/InstanceCredentialExfiltration.OutsideAWS",
      "Discovery:IAMUser/AnomalousBehavior",
      "UnauthorizedAccess:EC2/TorIPCaller",
  };
  return types;
}

bool IsKnownFindingType(const std::string& type) {
  const auto& t = KnownFindingTypes();
  return std::find(t.begin(), t.end(), type) != t.end();
}

}  // namespace adforge::sce
