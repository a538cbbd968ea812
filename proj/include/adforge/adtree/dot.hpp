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

#include <string>
#include <string_view>

#include "adforge/adtree/model.hpp"

namespace adforge::adtree {

// Parses the supported DOT subset (see docs/dot-subset.md) into a validated
// tree. Throws ParseError for syntax outside the subset and StructureError
// when the graph violates tree invariants.
ADTree ParseDot(std::string_view text);

// Canonical DOT text: graph and default attributes first, then node
// statements sorted by id, then edges in tree order. Reparses to an equal
// tree.
std::string EmitDot(const ADTree& tree);

// Reserved attribute names.
inline constexpr std::string_view kAttrKind = "adtkind";
inline constexpr std::string_view kAttrLabel = "label";
inline constexpr std::string_view kAttrMitre = "mitre";
inline constexpr std::string_view kAttrMitreOk = "mitre_ok";
inline constexpr std::string_view kAttrCommands = "cmd";
inline constexpr std::string_view kAttrInputs = "inputs";
inline constexpr std::string_view kAttrExpect = "expect";
inline constexpr std::string_view kAttrStep = "step";
inline constexpr std::string_view kAttrFill = "fillcolor";
inline constexpr std::string_view kAttrFontName = "fontname";
inline constexpr std::string_view kAttrFontSize = "fontsize";
// Graph attribute carrying the serialized StyleSheet.
inline constexpr std::string_view kAttrStyleSheet = "adtstyle";

// Separator for list-valued attributes (`cmd`, `inputs`).
inline constexpr std::string_view kListSeparator = ";;";

// Kind suggested by a fill color: dark blues map to Service, light blues to
// Attack. Returns nullopt for anything else.
std::optional<NodeKind> KindFromFill(std::string_view color);

std::string EncodeStyleSheet(const StyleSheet& sheet);
StyleSheet DecodeStyleSheet(std::string_view text);

}  // namespace adforge::adtree
