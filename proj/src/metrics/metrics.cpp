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

#include "adforge/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adforge/adtree/branch.hpp"
#include "adforge/errors.hpp"

namespace adforge::metrics {

using adtree::ADTree;
using adtree::NodeKind;

TechniqueCatalog::TechniqueCatalog(std::map<std::string, Technique> entries,
                                   std::string snapshot_date)
    : entries_(std::move(entries)), snapshot_date_(std::move(snapshot_date)) {
  if (entries_.empty()) throw ValidationError("technique catalog is empty");
  for (const auto& [id, t] : entries_) {
    if (!adtree::IsTechniqueId(id)) {
      throw ValidationError("catalog entry '" + id + "' is not a technique id");
    }
  }
}

TechniqueCatalog TechniqueCatalog::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("techniques") || !doc["techniques"].is_object()) {
    throw ValidationError("catalog must be an object with a 'techniques' map");
  }
  std::map<std::string, Technique> entries;
  for (const auto& [id, t] : doc["techniques"].items()) {
    entries.emplace(id, Technique{t.value("name", ""), t.value("tactic", "")});
  }
  return TechniqueCatalog(std::move(entries), doc.value("snapshot_date", ""));
}

TechniqueCatalog TechniqueCatalog::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read catalog " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("catalog " + path.string() + ": " + e.what());
  }
  return FromJson(doc);
}

ReferenceOrder ReferenceOrder::FromLines(const std::string& text) {
  ReferenceOrder ref;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(first, last - first + 1);
    if (!seen.insert(entry).second) {
      throw ValidationError("reference order repeats '" + entry + "'");
    }
    ref.sequence.push_back(std::move(entry));
  }
  return ref;
}

ReferenceOrder ReferenceOrder::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read reference order " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromLines(ss.str());
}

Hundredths PercentHalfUp(std::int64_t num, std::int64_t den) {
  // 100 * num / den in hundredths is 10000 * num / den; adding den / 2
  // before the division rounds half up.
  return (20000 * num + den) / (2 * den);
}

Hundredths MeanHalfUp(Hundredths a, Hundredths b, Hundredths c) {
  return (2 * (a + b + c) + 3) / 6;
}

namespace {

int CountAttack(const ADTree& tree) {
  const auto n = static_cast<int>(tree.CountKind(NodeKind::kAttack));
  if (n == 0) throw EmptyTree();
  return n;
}

bool NonEmpty(const std::optional<std::string>& s) { return s && !s->empty(); }

}  // namespace

MitreResult MitreScore(const ADTree& tree, const TechniqueCatalog& catalog) {
  const int n = CountAttack(tree);
  MitreResult out;
  for (const auto& [id, node] : tree.nodes()) {
    if (node.kind != NodeKind::kAttack) continue;
    const bool ok = node.mitre_id && catalog.contains(*node.mitre_id) &&
                    node.mitre_appropriate.value_or(true);
    out.m[id] = ok ? 1 : 0;
    out.qualifying += ok ? 1 : 0;
  }
  out.score = PercentHalfUp(out.qualifying, n);
  return out;
}

std::vector<std::size_t> CanonicalLongestNonDecreasing(const std::vector<std::int64_t>& ranks) {
  const std::size_t k = ranks.size();
  // longest[i]: length of the longest non-decreasing run starting at i.
  std::vector<std::size_t> longest(k, 1);
  std::size_t best = 0;
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (ranks[j] >= ranks[i]) longest[i] = std::max(longest[i], longest[j] + 1);
    }
    best = std::max(best, longest[i]);
  }
  std::vector<std::size_t> picked;
  std::size_t from = 0;
  for (std::size_t need = best; need > 0; --need) {
    for (std::size_t j = from; j < k; ++j) {
      if (longest[j] == need && (picked.empty() || ranks[j] >= ranks[picked.back()])) {
        picked.push_back(j);
        from = j + 1;
        break;
      }
    }
  }
  return picked;
}

OrderedResult OrderedScore(const ADTree& tree, const std::optional<ReferenceOrder>& reference) {
  const int n = CountAttack(tree);
  OrderedResult out;

  std::map<std::string, std::int64_t> rank;
  if (reference) {
    std::map<std::string, std::string> by_label;
    for (const auto& [id, node] : tree.nodes()) {
      if (node.kind == NodeKind::kAttack && !node.label.empty()) {
        by_label.emplace(node.label, id);
      }
    }
    for (std::size_t i = 0; i < reference->sequence.size(); ++i) {
      const std::string& entry = reference->sequence[i];
      if (tree.contains(entry)) {
        if (tree.node(entry).kind == NodeKind::kAttack) {
          rank.emplace(entry, static_cast<std::int64_t>(i));
        }
      } else if (auto it = by_label.find(entry); it != by_label.end()) {
        rank.emplace(it->second, static_cast<std::int64_t>(i));
      }
    }
  } else {
    for (const auto& [id, node] : tree.nodes()) {
      if (node.kind == NodeKind::kAttack && node.step_index) rank[id] = *node.step_index;
    }
  }

  for (const auto& [id, node] : tree.nodes()) {
    if (node.kind != NodeKind::kAttack) continue;
    out.deviated[id] = false;
    out.childless_nonfinal[id] = tree.children(id).empty();
  }

  if (!rank.empty()) {
    for (const auto& path : adtree::MaximalPaths(tree)) {
      std::vector<std::string> ids;
      std::vector<std::int64_t> ranks;
      for (const auto& id : path) {
        if (auto it = rank.find(id); it != rank.end()) {
          ids.push_back(id);
          ranks.push_back(it->second);
        }
      }
      const auto kept = CanonicalLongestNonDecreasing(ranks);
      std::vector<bool> in_lcs(ids.size(), false);
      for (auto i : kept) in_lcs[i] = true;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!in_lcs[i]) out.deviated[ids[i]] = true;
      }
    }
  }

  for (const auto& [id, d] : out.deviated) out.n_d += d ? 1 : 0;
  for (const auto& [id, c] : out.childless_nonfinal) out.n_sc += c ? 1 : 0;
  const int kept = std::max(0, n - out.n_d - out.n_sc);
  out.score = PercentHalfUp(kept, n);
  return out;
}

UsableResult UsableScore(const ADTree& tree) {
  const int n = CountAttack(tree);
  UsableResult out;
  for (const auto& [id, node] : tree.nodes()) {
    if (node.kind != NodeKind::kAttack) continue;
    NodeFlags f;
    f.c = node.commands.empty() ? 0 : 1;
    f.i = node.inputs.empty() ? 0 : 1;
    f.r = NonEmpty(node.expected_results) ? 1 : 0;
    out.flag_sum += f.c + f.i + f.r;
    out.flags[id] = f;
  }
  out.score = PercentHalfUp(out.flag_sum, 3 * static_cast<std::int64_t>(n));
  return out;
}

MetricReport TreeScore(const ADTree& tree, const TechniqueCatalog& catalog,
                       const std::optional<ReferenceOrder>& reference) {
  const MitreResult mitre = MitreScore(tree, catalog);
  const OrderedResult ordered = OrderedScore(tree, reference);
  const UsableResult usable = UsableScore(tree);

  MetricReport report;
  report.n = static_cast<int>(tree.CountKind(NodeKind::kAttack));
  report.mitre_score = mitre.score;
  report.ordered_score = ordered.score;
  report.usable_score = usable.score;
  report.tree_score = MeanHalfUp(mitre.score, ordered.score, usable.score);
  report.n_d = ordered.n_d;
  report.n_sc = ordered.n_sc;
  for (const auto& [id, flags] : usable.flags) {
    NodeFlags f = flags;
    f.m = mitre.m.at(id);
    f.deviated = ordered.deviated.at(id);
    f.childless_nonfinal = ordered.childless_nonfinal.at(id);
    report.per_node.emplace(id, f);
  }
  return report;
}

nlohmann::json ToJson(const MetricReport& report) {
  nlohmann::json per_node = nlohmann::json::object();
  for (const auto& [id, f] : report.per_node) {
    per_node[id] = {{"m", f.m},
                    {"c", f.c},
                    {"i", f.i},
                    {"r", f.r},
                    {"deviated", f.deviated},
                    {"childless_nonfinal", f.childless_nonfinal}};
  }
  return {{"schema_version", kSchemaVersion},
          {"n", report.n},
          {"mitre_score", ToDouble(report.mitre_score)},
          {"ordered_score", ToDouble(report.ordered_score)},
          {"usable_score", ToDouble(report.usable_score)},
          {"tree_score", ToDouble(report.tree_score)},
          {"n_d", report.n_d},
          {"n_sc", report.n_sc},
          {"per_node", per_node}};
}

MetricReport MetricReportFromJson(const nlohmann::json& doc) {
  auto hundredths = [&](const char* key) {
    return static_cast<Hundredths>(std::llround(doc.at(key).get<double>() * 100.0));
  };
  MetricReport r;
  r.n = doc.at("n").get<int>();
  r.mitre_score = hundredths("mitre_score");
  r.ordered_score = hundredths("ordered_score");
  r.usable_score = hundredths("usable_score");
  r.tree_score = hundredths("tree_score");
  r.n_d = doc.at("n_d").get<int>();
  r.n_sc = doc.at("n_sc").get<int>();
  for (const auto& [id, f] : doc.at("per_node").items()) {
    NodeFlags flags;
    flags.m = f.at("m").get<int>();
    flags.c = f.at("c").get<int>();
    flags.i = f.at("i").get<int>();
    flags.r = f.at("r").get<int>();
    flags.deviated = f.at("deviated").get<bool>();
    flags.childless_nonfinal = f.at("childless_nonfinal").get<bool>();
    r.per_node.emplace(id, flags);
  }
  return r;
}

std::string FormatTable(const MetricReport& report) {
  auto pct = [](Hundredths h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7.2f", ToDouble(h));
    return std::string(buf);
  };
  std::ostringstream os;
  os << "attack nodes (n)   " << report.n << "\n"
     << "MITRE score        " << pct(report.mitre_score) << " %\n"
     << "Ordered score      " << pct(report.ordered_score) << " %   (N_d=" << report.n_d
     << ", N_sc=" << report.n_sc << ")\n"
     << "Usable score       " << pct(report.usable_score) << " %\n"
     << "Tree score         " << pct(report.tree_score) << " %\n\n";
  std::size_t width = 4;
  for (const auto& [id, f] : report.per_node) width = std::max(width, id.size());
  os << std::string(width - 4, ' ') << "node  M C I R  deviated  dead-end\n";
  for (const auto& [id, f] : report.per_node) {
    os << std::string(width - id.size(), ' ') << id << "  " << f.m << ' ' << f.c << ' ' << f.i
       << ' ' << f.r << "  " << (f.deviated ? "yes     " : "no      ") << "  "
       << (f.childless_nonfinal ? "yes" : "no") << "\n";
  }
  return os.str();
}

}  // namespace adforge::metrics
