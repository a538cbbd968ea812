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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adforge/adtree/model.hpp"

namespace adforge::metrics {

struct Technique {
  std::string name;
  std::string tactic;

  bool operator==(const Technique&) const = default;
};

class TechniqueCatalog {
 public:
  TechniqueCatalog(std::map<std::string, Technique> entries, std::string snapshot_date);

  static TechniqueCatalog FromJson(const nlohmann::json& doc);
  static TechniqueCatalog Load(const std::filesystem::path& path);

  bool contains(const std::string& id) const { return entries_.count(id) > 0; }
  const std::map<std::string, Technique>& entries() const { return entries_; }
  const std::string& snapshot_date() const { return snapshot_date_; }

 private:
  std::map<std::string, Technique> entries_;
  std::string snapshot_date_;
};

// Expected order of attack steps from an external write-up. Entries name
// node ids; an entry that matches no id is matched against node labels.
struct ReferenceOrder {
  std::vector<std::string> sequence;

  // One entry per line; blank lines and lines starting with '#' are
  // skipped. Throws ValidationError on duplicate entries.
  static ReferenceOrder FromLines(const std::string& text);
  static ReferenceOrder Load(const std::filesystem::path& path);
};

// Fixed-point percentage in hundredths; 7160 is 71.60%.
using Hundredths = std::int64_t;

// round_half_up(100 * num / den, 2 decimals), exact for non-negative inputs.
Hundredths PercentHalfUp(std::int64_t num, std::int64_t den);
// round_half_up of the arithmetic mean of the given 2-decimal scores.
Hundredths MeanHalfUp(Hundredths a, Hundredths b, Hundredths c);

inline double ToDouble(Hundredths h) { return static_cast<double>(h) / 100.0; }

struct NodeFlags {
  int m = 0;
  int c = 0;
  int i = 0;
  int r = 0;
  bool deviated = false;
  bool childless_nonfinal = false;

  bool operator==(const NodeFlags&) const = default;
};

struct MitreResult {
  Hundredths score = 0;
  int qualifying = 0;
  std::map<std::string, int> m;
};

struct OrderedResult {
  Hundredths score = 0;
  int n_d = 0;
  int n_sc = 0;
  std::map<std::string, bool> deviated;
  std::map<std::string, bool> childless_nonfinal;
};

struct UsableResult {
  Hundredths score = 0;
  int flag_sum = 0;
  std::map<std::string, NodeFlags> flags;  // c/i/r populated
};

struct MetricReport {
  int n = 0;
  Hundredths mitre_score = 0;
  Hundredths ordered_score = 0;
  Hundredths usable_score = 0;
  Hundredths tree_score = 0;
  int n_d = 0;
  int n_sc = 0;
  std::map<std::string, NodeFlags> per_node;

  bool operator==(const MetricReport&) const = default;
};

// Share of attack nodes with a catalogued, non-vetoed technique id.
MitreResult MitreScore(const adtree::ADTree& tree, const TechniqueCatalog& catalog);

// Penalizes attack nodes out of reference order along any root-to-leaf path
// (longest-common-subsequence residual) and attack nodes with no children.
// Without a reference, `step` annotations supply the order.
OrderedResult OrderedScore(const adtree::ADTree& tree,
                           const std::optional<ReferenceOrder>& reference);

// Commands / inputs / expected-results coverage over attack nodes.
UsableResult UsableScore(const adtree::ADTree& tree);

MetricReport TreeScore(const adtree::ADTree& tree, const TechniqueCatalog& catalog,
                       const std::optional<ReferenceOrder>& reference);

// Positions (ascending) of the canonical longest non-decreasing subsequence
// of `ranks`: among all maximum-length choices, the lexicographically least
// index set.
std::vector<std::size_t> CanonicalLongestNonDecreasing(const std::vector<std::int64_t>& ranks);

inline constexpr const char* kSchemaVersion = "1";

nlohmann::json ToJson(const MetricReport& report);
MetricReport MetricReportFromJson(const nlohmann::json& doc);
// Fixed-width table for terminals.
std::string FormatTable(const MetricReport& report);

}  // namespace adforge::metrics
