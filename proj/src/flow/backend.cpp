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

#include "adforge/flow/backend.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <cstdlib>
#include <thread>

#include "adforge/errors.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::flow {

namespace {

std::string LastUserText(const std::vector<Message>& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::kUser) return it->content;
  }
  throw BackendError(0, "", "conversation has no user turn");
}

// Earlier user turns with the same text as the final one.
std::size_t PriorOccurrences(const std::vector<Message>& messages) {
  const std::string& last = LastUserText(messages);
  std::size_t n = 0;
  bool skipped_last = false;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role != Role::kUser) continue;
    if (!skipped_last) {
      skipped_last = true;
      continue;
    }
    if (it->content == last) ++n;
  }
  return n;
}

std::string Preview(const std::string& prompt) {
  constexpr std::size_t kMax = 120;
  std::string head = prompt.substr(0, prompt.find('\n'));
  if (head.size() > kMax) head = head.substr(0, kMax);
  return head;
}

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url SplitUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint must be an absolute URL");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view RoleName(Role role) { return role == Role::kUser ? "user" : "assistant"; }

std::optional<Role> RoleFromName(std::string_view name) {
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  return std::nullopt;
}

void BackendConfig::Validate() const {
  if (endpoint.empty()) throw ValidationError("backend endpoint must be set");
  SplitUrl(endpoint);
  if (model.empty()) throw ValidationError("backend model must be set");
  if (!(timeout_seconds > 0)) throw ValidationError("backend timeout must be positive");
  if (max_retries < 0) throw ValidationError("backend retries must be non-negative");
}

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  config_.Validate();
}

std::string HttpChatBackend::Complete(const std::vector<Message>& messages) {
  const Url url = SplitUrl(config_.endpoint);
  nlohmann::json body = {{"model", config_.model}, {"messages", nlohmann::json::array()}};
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", RoleName(m.role)}, {"content", m.content}});
  }
  const std::string payload = body.dump();

  httplib::Client client(url.origin);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_body = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    last_body = res->body;
    if (res->status == 200) {
      nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
      if (doc.is_object() && doc.contains("text") && doc["text"].is_string()) {
        return doc["text"].get<std::string>();
      }
      if (doc.is_object() && doc.contains("choices") && doc["choices"].is_array() &&
          !doc["choices"].empty()) {
        const auto& msg = doc["choices"][0].value("message", nlohmann::json::object());
        if (msg.contains("content") && msg["content"].is_string()) {
          return msg["content"].get<std::string>();
        }
      }
      throw BackendError(200, res->body, "backend reply has no text");
    }
    const bool retryable = res->status == 429 || res->status >= 500;
    if (!retryable) break;
  }
  throw BackendError(last_status, last_body,
                     "backend request failed" +
                         (last_status ? " with HTTP " + std::to_string(last_status)
                                      : std::string(": ") + last_body));
}

std::string PromptKey(const std::string& prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

MockBackend::MockBackend(std::vector<Entry> entries, std::vector<std::string> fallback)
    : fallback_(std::move(fallback)) {
  for (auto& e : entries) {
    const std::string key = e.key.empty() ? PromptKey(e.prompt) : e.key;
    replies_[key].push_back(std::move(e.reply));
  }
}

MockBackend MockBackend::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kTranscriptFormat) {
    throw ValidationError(std::string("transcript must declare format ") + kTranscriptFormat);
  }
  std::vector<Entry> entries;
  for (const auto& e : doc.value("entries", nlohmann::json::array())) {
    Entry entry;
    entry.key = e.value("key", "");
    entry.prompt = e.value("prompt", "");
    if (entry.key.empty() && entry.prompt.empty()) {
      throw ValidationError("transcript entry needs a key or a prompt");
    }
    if (!e.contains("reply") || !e["reply"].is_string()) {
      throw ValidationError("transcript entry needs a reply string");
    }
    entry.reply = e["reply"].get<std::string>();
    entries.push_back(std::move(entry));
  }
  std::vector<std::string> fallback;
  for (const auto& r : doc.value("fallback", nlohmann::json::array())) {
    fallback.push_back(r.get<std::string>());
  }
  return MockBackend(std::move(entries), std::move(fallback));
}

MockBackend MockBackend::Load(const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError("transcript " + path.string() + " is not JSON");
  return FromJson(doc);
}

std::string MockBackend::Complete(const std::vector<Message>& messages) {
  ++*calls_;
  const std::string& prompt = LastUserText(messages);
  auto it = replies_.find(PromptKey(prompt));
  if (it != replies_.end()) {
    const std::size_t k = PriorOccurrences(messages);
    return it->second[std::min(k, it->second.size() - 1)];
  }
  if (!fallback_.empty()) return fallback_[messages.size() % fallback_.size()];
  throw BackendError(404, Preview(prompt), "no recorded reply for prompt: " + Preview(prompt));
}

std::size_t MockBackend::calls() const { return calls_->load(); }

SequentialBackend::SequentialBackend(std::vector<std::string> replies)
    : replies_(std::move(replies)) {}

std::string SequentialBackend::Complete(const std::vector<Message>&) {
  if (next_ >= replies_.size()) throw BackendError(0, "", "no more scripted replies");
  return replies_[next_++];
}

std::string RecordingBackend::Complete(const std::vector<Message>& messages) {
  std::string reply = inner_.Complete(messages);
  const std::string& prompt = LastUserText(messages);
  entries_.push_back({PromptKey(prompt), prompt, reply});
  return reply;
}

nlohmann::json MergeTranscript(const nlohmann::json& existing,
                               const std::vector<MockBackend::Entry>& recorded) {
  nlohmann::json out = existing.is_object() ? existing : nlohmann::json::object();
  out["format"] = kTranscriptFormat;
  if (!out.contains("entries")) out["entries"] = nlohmann::json::array();
  auto& entries = out["entries"];

  std::map<std::string, std::vector<std::size_t>> positions;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    positions[entries[i].value("key", "")].push_back(i);
  }
  std::map<std::string, std::size_t> seen;
  for (const auto& e : recorded) {
    const std::size_t k = seen[e.key]++;
    auto& pos = positions[e.key];
    if (k < pos.size()) {
      const auto& stored = entries[pos[k]];
      if (stored.value("reply", "") != e.reply) {
        throw ValidationError("recorded reply for '" + Preview(e.prompt) +
                              "' conflicts with the stored transcript");
      }
      continue;
    }
    pos.push_back(entries.size());
    entries.push_back({{"key", e.key}, {"prompt", e.prompt}, {"reply", e.reply}});
  }
  return out;
}

std::unique_ptr<ChatBackend> MakeBackend(const std::string& selector,
                                         const std::optional<BackendConfig>& http) {
  if (selector.rfind("mock:", 0) == 0) {
    return std::make_unique<MockBackend>(MockBackend::Load(selector.substr(5)));
  }
  if (selector.empty() || selector == "http") {
    if (!http) throw ValidationError("http backend selected without endpoint configuration");
    return std::make_unique<HttpChatBackend>(*http);
  }
  throw ValidationError("unknown backend '" + selector + "'");
}

}  // namespace adforge::flow
