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

namespace adforge::sce {

struct Finding {
  std::string type;
  std::string severity;
  std::int64_t timestamp = 0;  // logical clock tick

  bool operator==(const Finding&) const = default;
};

struct Instance {
  std::string id;
  std::string role_name;
  std::string user_data;  // Base64 text, never decoded for execution

  bool operator==(const Instance&) const = default;
};

struct Credentials {
  std::string key_id;
  std::string secret;
  std::string token;
  std::string expiry;

  bool operator==(const Credentials&) const = default;
};

struct Role {
  std::vector<std::string> permissions;
  std::optional<Credentials> credentials;

  bool operator==(const Role&) const = default;
};

struct MockCloudState {
  std::vector<Finding> findings;
  std::vector<Instance> instances;
  std::map<std::string, Role> roles;
  std::vector<std::string> principal_permissions;
  bool detector_enabled = true;

  // Throws ValidationError on duplicate instance ids or instances naming
  // unknown roles.
  void Validate() const;

  bool operator==(const MockCloudState&) const = default;
};

nlohmann::json ToJson(const MockCloudState& state);
MockCloudState StateFromJson(const nlohmann::json& doc);
MockCloudState LoadState(const std::filesystem::path& path);

// True when `granted` contains `action`, `*`, or `<service>:*`.
bool Grants(const std::vector<std::string>& granted, const std::string& action);

inline constexpr const char* kCheckFindingsEmpty = "findings_empty";
inline constexpr const char* kCheckNoOverprivilegedRoles = "no_overprivileged_roles";
inline constexpr const char* kCheckDetectorEnabled = "detector_enabled";

// Pass/fail per check, in the order given. Throws UnknownCheck.
std::vector<std::pair<std::string, bool>> CheckSteadyState(const MockCloudState& state,
                                                           const std::vector<std::string>& checks);

// Finding types the simulated detector can raise.
const std::vector<std::string>& KnownFindingTypes();
bool IsKnownFindingType(const std::string& type);

}  // namespace adforge::sce
