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
#include <string>

#include <nlohmann/json.hpp>

namespace adforge {

// Converts YAML (or JSON) text to a JSON value. Quoted scalars stay strings;
// plain scalars become bool, integer, float or null when they read as one.
// Throws ValidationError on malformed input.
nlohmann::json YamlTextToJson(const std::string& text);

// Throws IoError when the file cannot be read.
std::string ReadFile(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& content);

}  // namespace adforge
