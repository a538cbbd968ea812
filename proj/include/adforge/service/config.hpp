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

#include "adforge/flow/backend.hpp"

namespace adforge::service {

struct AppConfig {
  std::filesystem::path state_dir = "state";
  // "mock:<transcript>" or empty when `http` is set.
  std::string backend;
  std::optional<flow::BackendConfig> http;
  std::filesystem::path catalog;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string log_level = "info";
  // Environment variable holding the shared bearer token for the API.
  std::optional<std::string> auth_token_env;
  std::optional<std::filesystem::path> ui_dir;

  // Throws ValidationError unless exactly one backend is selected and the
  // state directory can be created and written.
  void Validate() const;
};

// Catalog bundled with the build.
std::filesystem::path DefaultCatalogPath();

// YAML keys: state_dir, backend (string or {endpoint, model, token_env,
// timeout_seconds, max_retries}), catalog, listen ("host:port"), log_level,
// auth_token_env, ui_dir.
AppConfig LoadAppConfig(const std::filesystem::path& path);
AppConfig AppConfigFromText(const std::string& text);

// Splits "host:port"; throws ValidationError.
std::pair<std::string, int> ParseListen(const std::string& listen);

}  // namespace adforge::service
