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
#include <vector>

namespace adforge::flow {

// Bodies of fenced code blocks that start with `digraph` (leading whitespace
// and an optional `strict` allowed), in order. A reply with no fences that is
// itself a single digraph is returned whole.
std::vector<std::string> ExtractDotBlocks(const std::string& reply);

}  // namespace adforge::flow
