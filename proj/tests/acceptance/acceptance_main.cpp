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

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any fails. The CLI is exercised as a separate process.

#include <httplib.h>
#include <spdlog/spdlog.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include "adforge/adtree/dot.hpp"
#include "adforge/flow/backend.hpp"
#include "adforge/metrics/metrics.hpp"
#include "adforge/sce/runner.hpp"
#include "adforge/service/server.hpp"
#include "oracle/brute_force.hpp"
#include "support/common.hpp"
#include "support/flow_fuzz.hpp"
#include "support/random_tree.hpp"

namespace {

using namespace adforge;
using testing::FixturePath;
using testing::Slurp;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Proc {
  int code = -1;
  std::string out;
};

std::string Sh(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Proc Spawn(const std::vector<std::string>& args) {
  std::string cmd = Sh(ADFORGE_BIN);
  for (const auto& a : args) cmd += " " + Sh(a);
  cmd += " 2>/dev/null";
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, n);
  const int status = pclose(f);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

bool Near(double got, double want) { return std::fabs(got - want) <= 0.01 + 1e-9; }

std::string F(const char* rel) { return FixturePath(rel).string(); }

Outcome ScoreReproduction() {
  const auto t0 = Clock::now();
  struct Case {
    const char* file;
    int n, qualifying, flags;
    double mitre, ordered, usable, tree;
  };
  const Case cases[] = {{"trees/qwq.dot", 18, 4, 50, 22.22, 100.00, 92.59, 71.60},
                        {"trees/gpt4.dot", 9, 1, 20, 11.11, 100.00, 74.07, 61.73}};
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    const auto tree = adtree::ParseDot(Slurp(FixturePath(c.file)));
    const auto r = metrics::TreeScore(tree, testing::Catalog(), std::nullopt);
    const auto m = metrics::MitreScore(tree, testing::Catalog());
    const auto u = metrics::UsableScore(tree);
    const bool this_ok = r.n == c.n && m.qualifying == c.qualifying && u.flag_sum == c.flags &&
                         r.n_d == 0 && Near(metrics::ToDouble(r.mitre_score), c.mitre) &&
                         Near(metrics::ToDouble(r.ordered_score), c.ordered) &&
                         Near(metrics::ToDouble(r.usable_score), c.usable) &&
                         Near(metrics::ToDouble(r.tree_score), c.tree);
    ok = ok && this_ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s n=%d m=%d flags=%d -> %.2f/%.2f/%.2f/%.2f; ", c.file, r.n,
                  m.qualifying, u.flag_sum, metrics::ToDouble(r.mitre_score),
                  metrics::ToDouble(r.ordered_score), metrics::ToDouble(r.usable_score),
                  metrics::ToDouble(r.tree_score));
    detail += buf;
  }
  const double secs = Seconds(t0);
  detail += "time " + std::to_string(secs) + "s";
  return {ok && secs < 1.0, detail};
}

Outcome OracleEquivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  testing::RandomTreeOptions opt;
  opt.catalog_ids = testing::CatalogIds();
  opt.cosmetics = false;
  const auto ids = testing::CatalogIdSet();
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    adtree::ADTree t;
    do {
      t = testing::RandomTree(rng, opt);
    } while (t.CountKind(adtree::NodeKind::kAttack) == 0);
    if (t.nodes().size() > 12) return {false, "generator produced more than 12 nodes"};
    const auto ref = testing::RandomReference(rng, t);
    const auto got = metrics::TreeScore(t, testing::Catalog(), ref);
    const auto want = oracle::Evaluate(t, ids, ref);
    if (got.mitre_score != want.mitre || got.ordered_score != want.ordered ||
        got.usable_score != want.usable || got.tree_score != want.tree) {
      return {false, "mismatch on tree " + std::to_string(i) + ":\n" + adtree::EmitDot(t)};
    }
    ++checked;
  }
  const double secs = Seconds(t0);
  return {secs < 10.0, std::to_string(checked) + " trees, time " + std::to_string(secs) + "s"};
}

Outcome RoundTrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2025);
  testing::RandomTreeOptions opt;
  opt.catalog_ids = testing::CatalogIds();
  std::set<std::string> seen;
  for (int i = 0; i < 500; ++i) {
    const auto t = testing::RandomTree(rng, opt);
    const std::string dot = adtree::EmitDot(t);
    const auto back = adtree::ParseDot(dot);
    if (!(back == t)) return {false, "tree " + std::to_string(i) + ": " + testing::TreeDiff(t, back)};
    for (const char* attr : {"adtkind", "label", "mitre", "mitre_ok", "cmd", "inputs", "expect",
                             "step", "fillcolor", "fontname", "fontsize"}) {
      if (dot.find(std::string(" ") + attr + "=") != std::string::npos ||
          dot.find(std::string("[") + attr + "=") != std::string::npos) {
        seen.insert(attr);
      }
    }
  }
  const double secs = Seconds(t0);
  const bool all_attrs = seen.size() == 11;
  return {all_attrs && secs < 10.0, "500 trees, " + std::to_string(seen.size()) +
                                        "/11 reserved attributes exercised, time " +
                                        std::to_string(secs) + "s"};
}

Outcome FlowStateMachine() {
  const auto st = testing::RunPhaseFuzz(1000, 7);
  const std::string detail = std::to_string(st.sequences) + " sequences, " + std::to_string(st.ops) +
                             " ops, " + std::to_string(st.committed) + " committed, " +
                             std::to_string(st.illegal) + " illegal rejected";
  if (!st.failure.empty()) return {false, st.failure};
  return {st.sequences == 1000 && st.illegal > 0, detail};
}

Outcome EndToEndFlow() {
  const auto dir = std::filesystem::temp_directory_path() / "adforge_accept_flow";
  std::filesystem::remove_all(dir);
  const auto out = (dir / "accepted.dot").string();
  const auto flow = Spawn({"flow", "--spec", F("specs/govcloud.yaml"), "--backend",
                           "mock:" + F("transcripts/qwq.json"), "--script", F("scripts/qwq_flow.json"),
                           "--state-dir", dir.string(), "--out", out});
  if (flow.code != 0) return {false, "flow exited " + std::to_string(flow.code)};
  if (!std::filesystem::exists(out)) return {false, "no accepted tree written"};
  const bool same = Slurp(out) == Slurp(FixturePath("trees/qwq.dot"));
  const auto score = Spawn({"score", out, "--json"});
  if (score.code != 0) return {false, "score exited " + std::to_string(score.code)};
  const double tree = nlohmann::json::parse(score.out).at("tree_score").get<double>();
  std::filesystem::remove_all(dir);
  return {same && Near(tree, 71.60), std::string("byte-identical=") + (same ? "yes" : "no") +
                                         ", tree_score=" + std::to_string(tree)};
}

Outcome SceTrichotomy() {
  auto run = [](const char* state, const char* detector) {
    return Spawn({"experiment", "--tree", F("trees/qwq.dot"), "--goal", "goal", "--leaf", "ec2_use",
                  "--scenario", F("scenarios/privesc-defaults.yaml"), "--state", F(state),
                  "--detector", F(detector)});
  };
  const auto a = run("scenarios/state.json", "scenarios/detector.yaml");
  const auto b = run("scenarios/state-no-passrole.json", "scenarios/detector.yaml");
  const auto c = run("scenarios/state.json", "scenarios/detector-empty.yaml");
  for (const auto* p : {&a, &b, &c}) {
    if (p->out.empty()) return {false, "experiment produced no report"};
  }
  const auto ra = nlohmann::json::parse(a.out), rb = nlohmann::json::parse(b.out),
             rc = nlohmann::json::parse(c.out);
  auto all_success = [](const nlohmann::json& r) {
    for (const auto& s : r.at("stage_results")) {
      if (s.at("status") != "Success") return false;
    }
    return !r.at("stage_results").empty();
  };
  bool blocked = false;
  for (const auto& s : rb.at("stage_results")) {
    blocked = blocked || (s.at("action") == "CreateSpotInstance" && s.at("status") == "Blocked");
  }
  const bool ok_a = all_success(ra) && ra.at("detector_findings_emitted").size() == 1 &&
                    ra.at("hypothesis_verdict") == "Confirmed" && a.code == 0;
  const bool ok_b = blocked && rb.at("hypothesis_verdict") == "Inconclusive" && b.code == 5;
  const bool ok_c = all_success(rc) && rc.at("detector_findings_emitted").empty() &&
                    rc.at("hypothesis_verdict") == "Refuted" && c.code == 4;
  return {ok_a && ok_b && ok_c,
          "scenario=" + ra.at("hypothesis_verdict").get<std::string>() +
              ", no PassRole=" + rb.at("hypothesis_verdict").get<std::string>() +
              (blocked ? " (spot request Blocked)" : "") +
              ", no rules=" + rc.at("hypothesis_verdict").get<std::string>()};
}

Outcome CliHttpParity() {
  const auto dir = std::filesystem::temp_directory_path() / "adforge_accept_http";
  std::filesystem::remove_all(dir);
  service::AppConfig cfg;
  cfg.state_dir = dir;
  cfg.backend = "mock:" + F("transcripts/qwq.json");
  auto mock = flow::MockBackend::Load(FixturePath("transcripts/qwq.json"));
  service::ApiServer server(cfg, mock, testing::Catalog());
  const int port = server.BindAnyPort("127.0.0.1");
  if (port <= 0) return {false, "cannot bind"};
  std::thread t([&] { server.ListenAfterBind(); });
  server.WaitUntilReady();
  httplib::Client client("127.0.0.1", port);
  std::string detail;
  bool ok = true;
  for (const auto& [tree, golden] : std::vector<std::pair<const char*, std::string>>{
           {"trees/qwq.dot", "qwq_score.json"}, {"trees/gpt4.dot", "gpt4_score.json"}}) {
    const auto cli = Spawn({"score", F(tree), "--json"});
    const auto res = client.Post("/score", Slurp(FixturePath(tree)), "text/vnd.graphviz");
    const std::string want = Slurp(std::filesystem::path(ADFORGE_GOLDEN_DIR) / golden);
    const bool same = res && res->status == 200 && cli.code == 0 && cli.out == res->body &&
                      cli.out == want;
    ok = ok && same;
    detail += std::string(tree) + (same ? " identical; " : " differs; ");
  }
  server.Stop();
  t.join();
  std::filesystem::remove_all(dir);
  return {ok, detail};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"score-reproduction", ScoreReproduction},
      {"oracle-equivalence", OracleEquivalence},
      {"round-trip", RoundTrip},
      {"flow-state-machine", FlowStateMachine},
      {"end-to-end-mock-flow", EndToEndFlow},
      {"sce-experiment-trichotomy", SceTrichotomy},
      {"cli-http-parity", CliHttpParity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
    failed += o.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
