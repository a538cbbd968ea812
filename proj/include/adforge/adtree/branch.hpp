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

#include <optional>
#include <string>
#include <vector>

#include "adforge/adtree/model.hpp"

namespace adforge::adtree {

// Root-to-goal path ending at `goal_id`. With `leaf_hint`, only paths through
// that node qualify. Ties are broken lexicographically by node id sequence.
// Throws NotFound when the goal (or hint) is absent or no path qualifies.
Branch ExtractBranch(const ADTree& tree, const std::string& goal_id,
                     const std::optional<std::string>& leaf_hint = std::nullopt);

// Every maximal path from the root to a node without children, in
// lexicographic order.
std::vector<std::vector<std::string>> MaximalPaths(const ADTree& tree);

// Merges trees under a fresh root labelled `root_label`. Input roots are
// dropped and their children re-parented; colliding ids gain a `_k` suffix;
// a goal whose non-empty label matches a goal of an earlier input collapses
// into it. Throws StructureError if the collapse closes a cycle.
ADTree MergeTrees(const std::vector<ADTree>& trees, const std::string& root_label);

}  // namespace adforge::adtree
