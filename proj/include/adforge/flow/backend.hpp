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
#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace adforge::flow {

enum class Role { kUser, kAssistant };

std::string_view RoleName(Role role);
std::optional<Role> RoleFromName(std::string_view name);

struct Message {
  Role role;
  std::string content;

  bool operator==(const Message&) const = default;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the assistant reply to the conversation ending in a user turn.
  // Throws BackendError.
  virtual std::string Complete(const std::vector<Message>& messages) = 0;
};

struct BackendConfig {
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the bearer token.
  std::string token_env = "ADFORGE_BACKEND_TOKEN";
  double timeout_seconds = 60.0;
  int max_retries = 2;

  void Validate() const;
};

// POSTs {"model", "messages": [{"role", "content"}]} and reads either
// {"text": ...} or {"choices": [{"message": {"content": ...}}]}.
// Network failures, 429 and 5xx are retried up to max_retries times.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  std::string Complete(const std::vector<Message>& messages) override;

 private:
  BackendConfig config_;
};

// Hex SHA-256 of a prompt; keys recorded transcripts.
std::string PromptKey(const std::string& prompt);

// Replays recorded replies. The reply to a user prompt is the k-th recorded
// entry for its key, where k counts earlier identical user turns in the
// conversation; past the last entry the last one repeats. Prompts with no
// entry fall back to `fallback` replies (chosen by conversation length) or
// raise BackendError(404).
class MockBackend : public ChatBackend {
 public:
  struct Entry {
    std::string key;
    std::string prompt;
    std::string reply;
  };

  explicit MockBackend(std::vector<Entry> entries, std::vector<std::string> fallback = {});
  static MockBackend Load(const std::filesystem::path& path);
  static MockBackend FromJson(const nlohmann::json& doc);

  std::string Complete(const std::vector<Message>& messages) override;

  std::size_t calls() const;

 private:
  std::map<std::string, std::vector<std::string>> replies_;
  std::vector<std::string> fallback_;
  std::shared_ptr<std::atomic<std::size_t>> calls_ =
      std::make_shared<std::atomic<std::size_t>>(0);
};

// Returns the given replies in order; used to author transcripts.
class SequentialBackend : public ChatBackend {
 public:
  explicit SequentialBackend(std::vector<std::string> replies);
  std::string Complete(const std::vector<Message>& messages) override;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

// Forwards to another backend and keeps every (prompt, reply) exchange.
class RecordingBackend : public ChatBackend {
 public:
  explicit RecordingBackend(ChatBackend& inner) : inner_(inner) {}
  std::string Complete(const std::vector<Message>& messages) override;

  const std::vector<MockBackend::Entry>& entries() const { return entries_; }

 private:
  ChatBackend& inner_;
  std::vector<MockBackend::Entry> entries_;
};

inline constexpr const char* kTranscriptFormat = "adforge-transcript/1";

// Merges `recorded` into `existing` (same format as MockBackend::Load).
// The i-th occurrence of a key must match any already-stored i-th entry.
nlohmann::json MergeTranscript(const nlohmann::json& existing,
                               const std::vector<MockBackend::Entry>& recorded);

// "mock:<path>" selects a MockBackend; anything else is an error. Real
// backends are built from BackendConfig.
std::unique_ptr<ChatBackend> MakeBackend(const std::string& selector,
                                         const std::optional<BackendConfig>& http);

}  // namespace adforge::flow
