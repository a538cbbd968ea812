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

#include "adforge/service/config.hpp"

#include <fstream>

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

#ifndef ADFORGE_DEFAULT_DATA_DIR
#define ADFORGE_DEFAULT_DATA_DIR "data"
#endif

namespace adforge::service {

std::filesystem::path DefaultCatalogPath() {
  return std::filesystem::path(ADFORGE_DEFAULT_DATA_DIR) / "attack-catalog.json";
}

std::pair<std::string, int> ParseListen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ValidationError("listen address must be host:port");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ValidationError("listen port is not a number");
  }
  if (port < 0 || port > 65535) throw ValidationError("listen port out of range");
  return {listen.substr(0, colon), port};
}

void AppConfig::Validate() const {
  const bool mock = !backend.empty();
  if (mock == http.has_value()) {
    throw ValidationError("configure exactly one backend: mock:<transcript> or an http endpoint");
  }
  if (mock && backend.rfind("mock:", 0) != 0) {
    throw ValidationError("backend selector must start with mock:");
  }
  if (http) http->Validate();
  std::error_code ec;
  std::filesystem::create_directories(state_dir, ec);
  const auto probe = state_dir / ".write-probe";
  std::ofstream out(probe);
  if (ec || !out) throw ValidationError("state directory " + state_dir.string() + " is not writable");
  out.close();
  std::filesystem::remove(probe, ec);
}

AppConfig AppConfigFromText(const std::string& text) {
  const nlohmann::json doc = YamlTextToJson(text);
  if (!doc.is_object()) throw ValidationError("config must be a mapping");
  AppConfig cfg;
  cfg.catalog = DefaultCatalogPath();
  try {
    if (doc.contains("state_dir")) cfg.state_dir = doc.at("state_dir").get<std::string>();
    if (doc.contains("catalog")) cfg.catalog = doc.at("catalog").get<std::string>();
    if (doc.contains("log_level")) cfg.log_level = doc.at("log_level").get<std::string>();
    if (doc.contains("auth_token_env")) cfg.auth_token_env = doc.at("auth_token_env").get<std::string>();
    if (doc.contains("ui_dir")) cfg.ui_dir = doc.at("ui_dir").get<std::string>();
    if (doc.contains("listen")) {
      std::tie(cfg.listen_host, cfg.listen_port) = ParseListen(doc.at("listen").get<std::string>());
    }
    if (doc.contains("backend")) {
      const auto& b = doc.at("backend");
      if (b.is_string()) {
        cfg.backend = b.get<std::string>();
      } else {
        if (b.contains("token")) {
          throw ValidationError("backend tokens are read from the environment; set token_env instead");
        }
        flow::BackendConfig http;
        http.endpoint = b.at("endpoint").get<std::string>();
        http.model = b.at("model").get<std::string>();
        http.token_env = b.value("token_env", http.token_env);
        http.timeout_seconds = b.value("timeout_seconds", http.timeout_seconds);
        http.max_retries = b.value("max_retries", http.max_retries);
        cfg.http = http;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

AppConfig LoadAppConfig(const std::filesystem::path& path) {
  return AppConfigFromText(ReadFile(path));
}

}  // namespace adforge::service
