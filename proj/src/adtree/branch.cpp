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

#include "adforge/adtree/branch.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "adforge/errors.hpp"

namespace adforge::adtree {

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

Adjacency SortedChildren(const ADTree& tree) {
  Adjacency adj;
  for (const auto& e : tree.edges()) adj[e.parent].push_back(e.child);
  for (auto& [id, kids] : adj) std::sort(kids.begin(), kids.end());
  return adj;
}

// Nodes from which `target` is reachable (including `target`).
std::set<std::string> Ancestors(const ADTree& tree, const std::string& target) {
  std::map<std::string, std::vector<std::string>> rev;
  for (const auto& e : tree.edges()) rev[e.child].push_back(e.parent);
  std::set<std::string> seen{target};
  std::vector<std::string> stack{target};
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    for (const auto& p : rev[id]) {
      if (seen.insert(p).second) stack.push_back(p);
    }
  }
  return seen;
}

// Lexicographically least path from `from` to `to`; empty when none.
// Children are visited in sorted order and only nodes that can still reach
// `to` are entered, so the first complete path found is the least one.
std::vector<std::string> LeastPath(const Adjacency& adj, const std::set<std::string>& can_reach,
                                   const std::string& from, const std::string& to) {
  if (!can_reach.count(from)) return {};
  std::vector<std::string> path{from};
  while (path.back() != to) {
    auto it = adj.find(path.back());
    bool advanced = false;
    if (it != adj.end()) {
      for (const auto& child : it->second) {
        if (can_reach.count(child)) {
          path.push_back(child);
          advanced = true;
          break;
        }
      }
    }
    // Every node in can_reach has a child in can_reach unless it is `to`.
    if (!advanced) return {};
  }
  return path;
}

}  // namespace

Branch ExtractBranch(const ADTree& tree, const std::string& goal_id,
                     const std::optional<std::string>& leaf_hint) {
  if (!tree.contains(goal_id)) throw NotFound("no goal node '" + goal_id + "'");
  if (tree.node(goal_id).kind != NodeKind::kGoal) {
    throw ValidationError("node '" + goal_id + "' is not a goal node");
  }
  const Adjacency adj = SortedChildren(tree);
  const auto to_goal = Ancestors(tree, goal_id);

  Branch branch;
  branch.source_tree = tree.name;
  if (!leaf_hint) {
    branch.node_ids = LeastPath(adj, to_goal, tree.root(), goal_id);
  } else {
    if (!tree.contains(*leaf_hint)) throw NotFound("no node '" + *leaf_hint + "'");
    if (!to_goal.count(*leaf_hint)) {
      throw NotFound("goal '" + goal_id + "' is not reachable through '" + *leaf_hint + "'");
    }
    // Root-to-hint and hint-to-goal segments share only the hint, so the
    // least path through the hint is the least prefix plus the least suffix.
    auto prefix = LeastPath(adj, Ancestors(tree, *leaf_hint), tree.root(), *leaf_hint);
    auto suffix = LeastPath(adj, to_goal, *leaf_hint, goal_id);
    if (prefix.empty() || suffix.empty()) {
      throw NotFound("no branch to '" + goal_id + "' through '" + *leaf_hint + "'");
    }
    branch.node_ids = std::move(prefix);
    branch.node_ids.insert(branch.node_ids.end(), suffix.begin() + 1, suffix.end());
  }
  if (branch.node_ids.empty()) {
    throw NotFound("goal '" + goal_id + "' is not reachable from the root");
  }
  return branch;
}

std::vector<std::vector<std::string>> MaximalPaths(const ADTree& tree) {
  const Adjacency adj = SortedChildren(tree);
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> path;
  // Iterative DFS; each frame is (node, next child index).
  std::vector<std::pair<std::string, std::size_t>> stack{{tree.root(), 0}};
  path.push_back(tree.root());
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    auto it = adj.find(id);
    const std::size_t n = it == adj.end() ? 0 : it->second.size();
    if (n == 0 && next == 0) {
      out.push_back(path);
      next = 1;
    }
    if (next < n) {
      const std::string child = it->second[next++];
      stack.emplace_back(child, 0);
      path.push_back(child);
    } else {
      stack.pop_back();
      path.pop_back();
    }
  }
  return out;
}

ADTree MergeTrees(const std::vector<ADTree>& trees, const std::string& root_label) {
  if (trees.empty()) throw ValidationError("merge needs at least one tree");

  std::map<std::string, ADNode> nodes;
  std::vector<Edge> edges;
  std::set<std::pair<std::string, std::string>> edge_set;
  std::map<std::string, std::string> goal_by_label;

  std::vector<std::map<std::string, std::string>> renames(trees.size());
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const ADTree& t = trees[k];
    auto& rename = renames[k];
    std::vector<std::string> colliding;
    std::set<std::string> own;
    // Goals of earlier inputs this input has already folded into; a second
    // goal with the same label stays separate so no edge becomes a self-loop.
    std::set<std::string> claimed;
    const auto earlier_goals = goal_by_label;
    for (const auto& [id, node] : t.nodes()) own.insert(id);
    for (const auto& [id, node] : t.nodes()) {
      if (node.kind == NodeKind::kRoot) continue;
      if (node.kind == NodeKind::kGoal && !node.label.empty()) {
        auto it = earlier_goals.find(node.label);
        if (it != earlier_goals.end() && claimed.insert(it->second).second) {
          rename[id] = it->second;
          continue;
        }
      }
      if (nodes.count(id)) {
        colliding.push_back(id);
        continue;
      }
      rename[id] = id;
      nodes.emplace(id, node);
      if (node.kind == NodeKind::kGoal) goal_by_label.emplace(node.label, id);
    }
    for (const auto& id : colliding) {
      std::string fresh;
      for (int j = 1;; ++j) {
        fresh = id + "_" + std::to_string(j);
        if (!nodes.count(fresh) && !own.count(fresh)) break;
      }
      ADNode node = t.node(id);
      node.id = fresh;
      rename[id] = fresh;
      if (node.kind == NodeKind::kGoal) goal_by_label.emplace(node.label, fresh);
      nodes.emplace(fresh, std::move(node));
    }
  }

  std::string root_id = "root";
  for (int j = 1; nodes.count(root_id); ++j) root_id = "root_" + std::to_string(j);
  ADNode root;
  root.id = root_id;
  root.kind = NodeKind::kRoot;
  root.label = root_label;
  nodes.emplace(root_id, std::move(root));

  for (std::size_t k = 0; k < trees.size(); ++k) {
    const ADTree& t = trees[k];
    for (const auto& e : t.edges()) {
      const std::string parent = e.parent == t.root() ? root_id : renames[k].at(e.parent);
      const std::string child = renames[k].at(e.child);
      if (edge_set.emplace(parent, child).second) {
        edges.push_back({parent, child, e.attrs});
      }
    }
  }

  ADTree merged = ADTree::Build(std::move(nodes), std::move(edges), trees.front().style());
  merged.name = trees.front().name;
  merged.graph_attrs = trees.front().graph_attrs;
  merged.node_defaults = trees.front().node_defaults;
  merged.edge_defaults = trees.front().edge_defaults;
  return merged;
}

}  // namespace adforge::adtree
