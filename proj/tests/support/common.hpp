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

#include <set>
#include <string>
#include <vector>

#include "adforge/flow/prompt.hpp"
#include "adforge/metrics/metrics.hpp"
#include "support/fixtures.hpp"

namespace adforge::testing {

inline const metrics::TechniqueCatalog& Catalog() {
  static const metrics::TechniqueCatalog c =
      metrics::TechniqueCatalog::Load(DataPath("attack-catalog.json"));
  return c;
}

inline std::vector<std::string> CatalogIds() {
  std::vector<std::string> ids;
  for (const auto& [id, t] : Catalog().entries()) ids.push_back(id);
  return ids;
}

inline std::set<std::string> CatalogIdSet() {
  const auto ids = CatalogIds();
  return {ids.begin(), ids.end()};
}

inline flow::PromptSpec GovCloudSpec() {
  return flow::LoadPromptSpec(FixturePath("specs/govcloud.yaml"));
}

}  // namespace adforge::testing
