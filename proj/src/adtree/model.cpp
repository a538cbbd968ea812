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

#include "adforge/adtree/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "adforge/errors.hpp"

namespace adforge::adtree {

namespace {

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool IsTrimmed(const std::string& s) {
  return !s.empty() && !std::isspace(static_cast<unsigned char>(s.front())) &&
         !std::isspace(static_cast<unsigned char>(s.back()));
}

void CheckListItems(const ADNode& node, const std::vector<std::string>& items,
                    std::string_view what) {
  for (const auto& item : items) {
    if (!IsTrimmed(item) || item.find(";;") != std::string::npos) {
      throw StructureError(StructureFault::kInvalidAnnotation, node.id,
                           "node '" + node.id + "' has an invalid " +
                               std::string(what) + " entry");
    }
  }
}

void CheckNode(const ADNode& node) {
  if (node.mitre_id && !IsTechniqueId(*node.mitre_id)) {
    throw StructureError(StructureFault::kInvalidAnnotation, node.id,
                         "node '" + node.id + "' has malformed technique id '" +
                             *node.mitre_id + "'");
  }
  if (node.kind == NodeKind::kRoot || node.kind == NodeKind::kGoal) {
    if (node.mitre_id || !node.commands.empty() || node.step_index) {
      throw StructureError(StructureFault::kInvalidAnnotation, node.id,
                           std::string(KindName(node.kind)) + " node '" + node.id +
                               "' must not carry mitre, cmd or step");
    }
  }
  if (node.step_index && *node.step_index < 0) {
    throw StructureError(StructureFault::kInvalidAnnotation, node.id,
                         "node '" + node.id + "' has a negative step");
  }
  CheckListItems(node, node.commands, "cmd");
  CheckListItems(node, node.inputs, "inputs");
}

}  // namespace

std::string_view KindName(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRoot:
      return "root";
    case NodeKind::kService:
      return "service";
    case NodeKind::kAttack:
      return "attack";
    case NodeKind::kDefense:
      return "defense";
    case NodeKind::kGoal:
      return "goal";
  }
  return "attack";
}

std::optional<NodeKind> KindFromName(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "root") return NodeKind::kRoot;
  if (lower == "service") return NodeKind::kService;
  if (lower == "attack") return NodeKind::kAttack;
  if (lower == "defense" || lower == "defence") return NodeKind::kDefense;
  if (lower == "goal") return NodeKind::kGoal;
  return std::nullopt;
}

bool IsTechniqueId(std::string_view id) {
  if (id.size() != 5 && id.size() != 9) return false;
  if (id[0] != 'T') return false;
  for (std::size_t i = 1; i < 5; ++i) {
    if (!IsDigit(id[i])) return false;
  }
  if (id.size() == 9) {
    if (id[5] != '.') return false;
    for (std::size_t i = 6; i < 9; ++i) {
      if (!IsDigit(id[i])) return false;
    }
  }
  return true;
}

bool IsColor(std::string_view color) {
  if (color.empty()) return false;
  if (color[0] == '#') {
    if (color.size() != 7) return false;
    return std::all_of(color.begin() + 1, color.end(), [](unsigned char c) {
      return std::isxdigit(c) != 0;
    });
  }
  if (!std::isalpha(static_cast<unsigned char>(color[0]))) return false;
  return std::all_of(color.begin(), color.end(),
                     [](unsigned char c) { return std::isalnum(c) != 0; });
}

ADTree ADTree::Build(std::map<std::string, ADNode> nodes, std::vector<Edge> edges,
                     std::optional<StyleSheet> style) {
  ADTree tree;
  tree.nodes_ = std::move(nodes);
  tree.edges_ = std::move(edges);
  if (style && !style->empty()) tree.style_ = std::move(style);
  tree.Validate();
  return tree;
}

void ADTree::Validate() {
  if (style_) {
    for (const auto& [kind, color] : style_->fill) {
      if (!IsColor(color)) {
        throw StructureError(StructureFault::kInvalidAnnotation, "",
                             "stylesheet color '" + color + "' is not a valid color");
      }
    }
    if (style_->fontname && (style_->fontname->empty() ||
                             style_->fontname->find_first_of(";=") != std::string::npos)) {
      throw StructureError(StructureFault::kInvalidAnnotation, "",
                           "stylesheet font name is invalid");
    }
    if (style_->fontsize && *style_->fontsize <= 0) {
      throw StructureError(StructureFault::kInvalidAnnotation, "",
                           "stylesheet font size must be positive");
    }
  }

  for (const auto& [key, node] : nodes_) {
    if (key.empty() || node.id.empty()) {
      throw StructureError(StructureFault::kEmptyId, "", "node id must be non-empty");
    }
    if (key != node.id) {
      throw StructureError(StructureFault::kMissingNode, key,
                           "node map key '" + key + "' does not match id '" +
                               node.id + "'");
    }
    CheckNode(node);
  }

  std::set<std::pair<std::string, std::string>> seen;
  std::unordered_map<std::string, std::vector<std::string>> out;
  std::unordered_map<std::string, int> in_degree;
  for (const auto& e : edges_) {
    for (const auto* endpoint : {&e.parent, &e.child}) {
      if (!nodes_.count(*endpoint)) {
        throw StructureError(StructureFault::kMissingNode, *endpoint,
                             "edge " + e.parent + "->" + e.child +
                                 " references unknown node '" + *endpoint + "'");
      }
    }
    if (!seen.emplace(e.parent, e.child).second) {
      throw StructureError(StructureFault::kDuplicateEdge, e.parent + "->" + e.child,
                           "duplicate edge " + e.parent + "->" + e.child);
    }
    out[e.parent].push_back(e.child);
    ++in_degree[e.child];
  }

  // Cycle detection first so a back edge is named as such rather than as an
  // in-degree or root violation.
  {
    enum class Mark { kNew, kActive, kDone };
    std::unordered_map<std::string, Mark> mark;
    for (const auto& [id, node] : nodes_) mark[id] = Mark::kNew;
    for (const auto& [start, node] : nodes_) {
      if (mark[start] != Mark::kNew) continue;
      std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
      mark[start] = Mark::kActive;
      while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const auto& kids = out[id];
        if (next < kids.size()) {
          const std::string& child = kids[next++];
          if (mark[child] == Mark::kActive) {
            throw StructureError(StructureFault::kCycle, id + "->" + child,
                                 "cycle through edge " + id + "->" + child);
          }
          if (mark[child] == Mark::kNew) {
            mark[child] = Mark::kActive;
            stack.emplace_back(child, 0);
          }
        } else {
          mark[id] = Mark::kDone;
          stack.pop_back();
        }
      }
    }
  }

  std::vector<std::string> roots;
  for (const auto& [id, node] : nodes_) {
    if (node.kind == NodeKind::kRoot) roots.push_back(id);
  }
  if (roots.empty()) {
    throw StructureError(StructureFault::kNoRoot, "", "tree has no root node");
  }
  if (roots.size() > 1) {
    throw StructureError(StructureFault::kMultipleRoots, roots[1],
                         "multiple root nodes: '" + roots[0] + "' and '" +
                             roots[1] + "'");
  }
  root_ = roots.front();

  for (const auto& [id, node] : nodes_) {
    const int deg = in_degree.count(id) ? in_degree[id] : 0;
    if (node.kind == NodeKind::kRoot && deg > 0) {
      throw StructureError(StructureFault::kInDegree, id,
                           "root node '" + id + "' has incoming edges");
    }
    if (node.kind != NodeKind::kGoal && deg > 1) {
      throw StructureError(StructureFault::kInDegree, id,
                           "non-goal node '" + id + "' has " + std::to_string(deg) +
                               " parents");
    }
  }

  std::set<std::string> reached{root_};
  std::vector<std::string> frontier{root_};
  while (!frontier.empty()) {
    std::string id = std::move(frontier.back());
    frontier.pop_back();
    for (const auto& child : out[id]) {
      if (reached.insert(child).second) frontier.push_back(child);
    }
  }
  for (const auto& [id, node] : nodes_) {
    if (!reached.count(id)) {
      throw StructureError(StructureFault::kUnreachable, id,
                           "node '" + id + "' is not reachable from root '" +
                               root_ + "'");
    }
  }
}

const ADNode& ADTree::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFound("no node '" + id + "'");
  return it->second;
}

std::vector<std::string> ADTree::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.parent == id) out.push_back(e.child);
  }
  return out;
}

std::vector<std::string> ADTree::parents(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.child == id) out.push_back(e.parent);
  }
  return out;
}

std::size_t ADTree::CountKind(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(),
                    [kind](const auto& kv) { return kv.second.kind == kind; }));
}

std::vector<std::string> ADTree::AttackIds() const {
  std::vector<std::string> ids;
  for (const auto& [id, node] : nodes_) {
    if (node.kind == NodeKind::kAttack) ids.push_back(id);
  }
  return ids;
}

ADTree ApplyStyleSheet(const ADTree& tree, const StyleSheet& sheet) {
  StyleSheet merged = tree.style().value_or(StyleSheet{});
  for (const auto& [kind, color] : sheet.fill) merged.fill[kind] = color;
  if (sheet.fontname) merged.fontname = sheet.fontname;
  if (sheet.fontsize) merged.fontsize = sheet.fontsize;

  auto nodes = tree.nodes();
  for (auto& [id, node] : nodes) {
    if (sheet.fill.count(node.kind)) node.fillcolor.reset();
    if (sheet.fontname) node.fontname.reset();
    if (sheet.fontsize) node.fontsize.reset();
  }
  ADTree out = ADTree::Build(std::move(nodes), tree.edges(), merged);
  out.name = tree.name;
  out.graph_attrs = tree.graph_attrs;
  out.node_defaults = tree.node_defaults;
  out.edge_defaults = tree.edge_defaults;
  return out;
}

ADTree WithStructure(const ADTree& tree, std::map<std::string, ADNode> nodes,
                     std::vector<Edge> edges) {
  ADTree out = ADTree::Build(std::move(nodes), std::move(edges), tree.style());
  out.name = tree.name;
  out.graph_attrs = tree.graph_attrs;
  out.node_defaults = tree.node_defaults;
  out.edge_defaults = tree.edge_defaults;
  return out;
}

}  // namespace adforge::adtree
