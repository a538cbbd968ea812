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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adforge::adtree {

enum class NodeKind { kRoot, kService, kAttack, kDefense, kGoal };

// Lowercase names used for the `adtkind` attribute.
std::string_view KindName(NodeKind kind);
std::optional<NodeKind> KindFromName(std::string_view name);

using AttrMap = std::map<std::string, std::string>;

// True iff `id` is `T` + 4 digits, optionally followed by `.` + 3 digits.
bool IsTechniqueId(std::string_view id);

// `#RRGGBB` or a DOT/X11 color name (letters and digits, starting with a letter).
bool IsColor(std::string_view color);

struct ADNode {
  std::string id;
  NodeKind kind = NodeKind::kAttack;
  std::string label;
  std::optional<std::string> mitre_id;
  // Analyst verdict on whether the technique fits; absent means "not vetoed".
  std::optional<bool> mitre_appropriate;
  std::vector<std::string> commands;
  std::vector<std::string> inputs;
  std::optional<std::string> expected_results;
  std::optional<std::int64_t> step_index;

  // Per-node cosmetics; when unset the tree's StyleSheet applies.
  std::optional<std::string> fillcolor;
  std::optional<std::string> fontname;
  std::optional<int> fontsize;

  // Attributes outside the reserved set, kept for lossless round-trip.
  AttrMap extra;

  bool operator==(const ADNode&) const = default;
};

struct Edge {
  std::string parent;
  std::string child;
  AttrMap attrs;

  bool operator==(const Edge&) const = default;
};

struct StyleSheet {
  std::map<NodeKind, std::string> fill;
  std::optional<std::string> fontname;
  std::optional<int> fontsize;

  bool empty() const { return fill.empty() && !fontname && !fontsize; }
  bool operator==(const StyleSheet&) const = default;
};

class ADTree {
 public:
  ADTree() = default;

  // Builds and validates; throws StructureError on any invariant violation.
  static ADTree Build(std::map<std::string, ADNode> nodes, std::vector<Edge> edges,
                      std::optional<StyleSheet> style = std::nullopt);

  const std::map<std::string, ADNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& root() const { return root_; }
  const std::optional<StyleSheet>& style() const { return style_; }

  // Pass-through DOT statements that are not node or edge data.
  std::string name;
  AttrMap graph_attrs;
  AttrMap node_defaults;
  AttrMap edge_defaults;

  const ADNode& node(const std::string& id) const;
  bool contains(const std::string& id) const { return nodes_.count(id) > 0; }

  // Children/parents in edge-list order.
  std::vector<std::string> children(const std::string& id) const;
  std::vector<std::string> parents(const std::string& id) const;

  std::size_t CountKind(NodeKind kind) const;
  // Ids of kind=Attack nodes, sorted.
  std::vector<std::string> AttackIds() const;

  bool operator==(const ADTree&) const = default;

 private:
  void Validate();

  std::map<std::string, ADNode> nodes_;
  std::vector<Edge> edges_;
  std::string root_;
  std::optional<StyleSheet> style_;
};

// A root-to-goal path through a tree.
struct Branch {
  std::vector<std::string> node_ids;
  // Identifies the source tree; callers typically use the tree name or a
  // candidate index.
  std::string source_tree;

  bool operator==(const Branch&) const = default;
};

// Returns a copy of `tree` with `sheet` merged over its current StyleSheet.
// Per-node fill overrides on kinds named by `sheet` are cleared so the sheet
// takes effect for every node of that kind.
ADTree ApplyStyleSheet(const ADTree& tree, const StyleSheet& sheet);

// Returns a copy of `tree` with its structure replaced; pass-through DOT
// metadata and style are retained. Validates like ADTree::Build.
ADTree WithStructure(const ADTree& tree, std::map<std::string, ADNode> nodes,
                     std::vector<Edge> edges);

}  // namespace adforge::adtree
