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

#include "adforge/flow/store.hpp"

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::flow {

bool IsValidSessionId(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (unsigned char c : id) {
    if (!(std::isalnum(c) || c == '_' || c == '-')) return false;
  }
  return true;
}

SessionStore::SessionStore(std::filesystem::path root) : dir_(std::move(root) / "sessions") {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
}

std::filesystem::path SessionStore::PathFor(const std::string& id) const {
  if (!IsValidSessionId(id)) throw NotFound("no session '" + id + "'");
  return dir_ / (id + ".json");
}

void SessionStore::Save(const FlowSession& session) {
  WriteFileAtomic(PathFor(session.id), ToJson(session).dump(2) + "\n");
}

FlowSession SessionStore::Load(const std::string& id) const {
  const auto path = PathFor(id);
  if (!std::filesystem::exists(path)) throw NotFound("no session '" + id + "'");
  auto doc = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("session file " + path.string() + " is corrupt");
  return SessionFromJson(doc);
}

bool SessionStore::Exists(const std::string& id) const {
  return IsValidSessionId(id) && std::filesystem::exists(dir_ / (id + ".json"));
}

std::unique_lock<std::mutex> SessionStore::Lock(const std::string& id) {
  std::mutex* m;
  {
    std::lock_guard<std::mutex> guard(locks_mu_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    m = slot.get();
  }
  return std::unique_lock<std::mutex>(*m);
}

}  // namespace adforge::flow
