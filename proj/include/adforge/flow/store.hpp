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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "adforge/flow/session.hpp"

namespace adforge::flow {

// Sessions as JSON files under `<root>/sessions/<id>.json`. Writes go to a
// temporary file and are renamed into place.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  void Save(const FlowSession& session);
  // Throws NotFound.
  FlowSession Load(const std::string& id) const;
  bool Exists(const std::string& id) const;

  // Serializes work on one session id across threads.
  std::unique_lock<std::mutex> Lock(const std::string& id);

  std::filesystem::path PathFor(const std::string& id) const;

 private:
  std::filesystem::path dir_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

// Ids are restricted to [A-Za-z0-9_-] so they map to safe file names.
bool IsValidSessionId(const std::string& id);

}  // namespace adforge::flow
