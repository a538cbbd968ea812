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

#include "adforge/flow/extract.hpp"

#include <cctype>

namespace adforge::flow {

namespace {

std::size_t SkipSpace(const std::string& s, std::size_t pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos;
}

bool StartsWithWord(const std::string& s, std::size_t pos, std::string_view word) {
  if (s.compare(pos, word.size(), word) != 0) return false;
  const std::size_t end = pos + word.size();
  return end == s.size() || !(std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_');
}

bool LooksLikeDigraph(const std::string& body) {
  std::size_t pos = SkipSpace(body, 0);
  if (StartsWithWord(body, pos, "strict")) pos = SkipSpace(body, pos + 6);
  return StartsWithWord(body, pos, "digraph");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> ExtractDotBlocks(const std::string& reply) {
  std::vector<std::string> out;
  bool saw_fence = false;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = reply.find("```", pos);
    if (open == std::string::npos) break;
    saw_fence = true;
    // Info string runs to end of line.
    std::size_t body = reply.find('\n', open + 3);
    if (body == std::string::npos) break;
    ++body;
    std::size_t close = reply.find("```", body);
    const bool closed = close != std::string::npos;
    if (!closed) close = reply.size();
    std::string text = reply.substr(body, close - body);
    if (LooksLikeDigraph(text)) out.push_back(Trim(text));
    if (!closed) break;
    pos = close + 3;
  }
  if (!saw_fence && LooksLikeDigraph(reply)) {
    std::string whole = Trim(reply);
    if (!whole.empty() && whole.back() == '}') out.push_back(whole);
  }
  return out;
}

}  // namespace adforge::flow
