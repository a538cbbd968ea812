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

#include <gtest/gtest.h>

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/backend.hpp"
#include "adforge/service/config.hpp"
#include "adforge/service/handlers.hpp"
#include "adforge/service/server.hpp"
#include "support/cli_runner.hpp"
#include "support/common.hpp"

namespace adforge::service {
namespace {

using testing::Catalog;
using testing::FixturePath;
using testing::RunCliWith;
using testing::Slurp;

std::string Fix(const std::string& rel) { return FixturePath(rel).string(); }

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("adforge_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Config, ParsesYaml) {
  const auto cfg = AppConfigFromText(
      "state_dir: /tmp/adforge_cfg\nbackend: mock:t.json\nlisten: 0.0.0.0:9000\n"
      "log_level: debug\nauth_token_env: API_TOKEN\n");
  EXPECT_EQ(cfg.backend, "mock:t.json");
  EXPECT_EQ(cfg.listen_host, "0.0.0.0");
  EXPECT_EQ(cfg.listen_port, 9000);
  EXPECT_EQ(cfg.auth_token_env, "API_TOKEN");
  EXPECT_NO_THROW(cfg.Validate());
}

TEST(Config, HttpBackendTakesTokenFromEnvironmentOnly) {
  const auto cfg = AppConfigFromText(
      "state_dir: /tmp/adforge_cfg\nbackend:\n  endpoint: https://llm.example/v1/chat\n"
      "  model: local-model\n  token_env: MY_LLM_TOKEN\n");
  ASSERT_TRUE(cfg.http.has_value());
  EXPECT_EQ(cfg.http->token_env, "MY_LLM_TOKEN");
  EXPECT_THROW(AppConfigFromText("backend:\n  endpoint: https://x\n  model: m\n  token: abc\n"),
               ValidationError);
}

TEST(Config, ExactlyOneBackend) {
  AppConfig cfg;
  cfg.state_dir = TempDir("cfg1");
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg.backend = "mock:x.json";
  cfg.http = flow::BackendConfig{"http://x", "m"};
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg.http.reset();
  EXPECT_NO_THROW(cfg.Validate());
}

TEST(Config, ParseListen) {
  EXPECT_EQ(ParseListen("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_THROW(ParseListen("nohost"), ValidationError);
  EXPECT_THROW(ParseListen("h:99999"), ValidationError);
  EXPECT_THROW(ParseListen("h:80x"), ValidationError);
}

TEST(Errors, BodiesAndStatuses) {
  const auto parse = ErrorBody(ParseError(3, 12, "expected a value"));
  EXPECT_EQ(parse.at("code"), "parse_error");
  EXPECT_EQ(parse.at("detail").at("line"), 3);
  EXPECT_EQ(parse.at("detail").at("column"), 12);
  EXPECT_EQ(HttpStatusFor(ParseError(1, 1, "x")), 400);
  EXPECT_EQ(HttpStatusFor(NotFound("x")), 404);
  EXPECT_EQ(HttpStatusFor(IllegalTransition("x")), 409);
  EXPECT_EQ(HttpStatusFor(PreconditionError("x")), 409);
  EXPECT_EQ(HttpStatusFor(BackendError(500, "", "x")), 502);
  EXPECT_EQ(HttpStatusFor(ValidationError("x")), 400);
  const auto unusable = ErrorBody(UnusableBranch({"a", "b"}));
  EXPECT_EQ(unusable.at("detail").at("nodes"), nlohmann::json::array({"a", "b"}));
}

TEST(Handlers, StyleSheetJson) {
  const auto sheet = StyleSheetFromJson(nlohmann::json::parse(
      R"({"fill": {"attack": "#ADD8E6", "goal": "tomato"}, "fontname": "Helvetica", "fontsize": 11})"));
  EXPECT_EQ(sheet.fill.at(adtree::NodeKind::kAttack), "#ADD8E6");
  EXPECT_EQ(StyleSheetFromJson(ToJson(sheet)), sheet);
  EXPECT_THROW(StyleSheetFromJson(nlohmann::json::parse(R"({"fill": {"bogus": "#000000"}})")),
               ValidationError);
}

TEST(Handlers, ExitCodes) {
  EXPECT_EQ(ExperimentExitCode(sce::HypothesisVerdict::kConfirmed), 0);
  EXPECT_EQ(ExperimentExitCode(sce::HypothesisVerdict::kRefuted), 4);
  EXPECT_EQ(ExperimentExitCode(sce::HypothesisVerdict::kInconclusive), 5);
}

class Api : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = TempDir("api_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    Start();
  }
  void TearDown() override {
    Stop();
    std::filesystem::remove_all(dir_);
  }
  void Start() {
    AppConfig cfg;
    cfg.state_dir = dir_;
    cfg.backend = "mock:" + Fix("transcripts/qwq.json");
    cfg.auth_token_env = auth_env_;
    server_ = std::make_unique<ApiServer>(cfg, mock_, Catalog());
    int n = 0;
    server_->set_id_generator([n]() mutable { return "s" + std::to_string(++n); });
    port_ = server_->BindAnyPort("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->ListenAfterBind(); });
    server_->WaitUntilReady();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void Stop() {
    if (!server_) return;
    server_->Stop();
    thread_.join();
    server_.reset();
  }
  httplib::Result PostJson(const std::string& path, const nlohmann::json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }
  nlohmann::json CreateSession() {
    const auto res = PostJson("/sessions", {{"spec", flow::ToJson(testing::GovCloudSpec())}});
    EXPECT_EQ(res->status, 201);
    return nlohmann::json::parse(res->body);
  }

  std::filesystem::path dir_;
  std::optional<std::string> auth_env_;
  flow::MockBackend mock_ = flow::MockBackend::Load(Fix("transcripts/qwq.json"));
  std::unique_ptr<ApiServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(Api, Health) {
  const auto res = client_->Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body).at("status"), "ok");
}

TEST_F(Api, CreateAndGetSession) {
  const auto doc = CreateSession();
  EXPECT_EQ(doc.at("id"), "s1");
  EXPECT_EQ(doc.at("phase"), "PromptContext");
  EXPECT_EQ(doc.at("transcript").size(), 6u);
  const auto got = client_->Get("/sessions/s1");
  EXPECT_EQ(got->status, 200);
  EXPECT_EQ(nlohmann::json::parse(got->body), doc);
  EXPECT_EQ(client_->Get("/sessions/unknown")->status, 404);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "sessions" / "s1.json"));
}

TEST_F(Api, BadRequests) {
  EXPECT_EQ(PostJson("/sessions", {{"spec", {{"system_context", "x"}}}})->status, 400);
  EXPECT_EQ(client_->Post("/sessions", "not json", "application/json")->status, 400);
  CreateSession();
  const auto res = PostJson("/sessions/s1/validate", {{"verdict", "refine"}});
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body).at("code"), "validation_error");
}

TEST_F(Api, IllegalTransitionLeavesStateUntouched) {
  CreateSession();
  const std::string before = client_->Get("/sessions/s1")->body;
  const auto res = PostJson("/sessions/s1/merge", nlohmann::json::object());
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(nlohmann::json::parse(res->body).at("code"), "illegal_transition");
  EXPECT_EQ(client_->Get("/sessions/s1")->body, before);
}

TEST_F(Api, ScriptedFlowEndToEnd) {
  CreateSession();
  const auto script = nlohmann::json::parse(Slurp(Fix("scripts/qwq_flow.json")));
  for (const auto& step : script) {
    const std::string op = step.at("op");
    if (op == "start") continue;
    const auto res = PostJson("/sessions/s1/" + op, step);
    ASSERT_EQ(res->status, 200) << op << ": " << res->body;
  }
  const auto s = nlohmann::json::parse(client_->Get("/sessions/s1")->body);
  EXPECT_EQ(s.at("phase"), "Done");
  const auto dot = client_->Get("/sessions/s1/tree.dot");
  EXPECT_EQ(dot->status, 200);
  EXPECT_EQ(dot->get_header_value("Content-Type"), "text/vnd.graphviz");
  EXPECT_EQ(dot->body, Slurp(Fix("trees/qwq.dot")));
  EXPECT_EQ(client_->Get("/sessions/s1/tree.dot?candidate=99")->status, 404);

  // Compile from the session and run against the scenario.
  const auto compiled = PostJson("/experiments/compile",
                                 {{"session_id", "s1"}, {"goal", "goal"}, {"leaf_hint", "ec2_use"}});
  ASSERT_EQ(compiled->status, 200) << compiled->body;
  const auto exp = nlohmann::json::parse(compiled->body).at("experiment");
  const auto state = nlohmann::json::parse(Slurp(Fix("scenarios/state.json")));
  const auto detector = nlohmann::json::parse(
      R"({"rules":[{"name":"r","event":"ec2:RequestSpotInstances","field":"user_data_decoded",)"
      R"("pattern":"/dev/tcp/","finding_type":"PrivilegeEscalation:EC2/SpotInstanceSuspiciousUserData"}]})");
  const auto run = PostJson("/experiments/run", {{"experiment", exp}, {"state", state}, {"detector", detector}});
  ASSERT_EQ(run->status, 200) << run->body;
  EXPECT_EQ(nlohmann::json::parse(run->body).at("hypothesis_verdict"), "Confirmed");
  const auto refuted = PostJson("/experiments/run", {{"experiment", exp}, {"state", state}});
  EXPECT_EQ(nlohmann::json::parse(refuted->body).at("hypothesis_verdict"), "Refuted");

  // A restarted service serves the same documents.
  const std::string before = client_->Get("/sessions/s1")->body;
  Stop();
  Start();
  EXPECT_EQ(client_->Get("/sessions/s1")->body, before);
}

TEST_F(Api, UnusableBranchListsNodes) {
  const auto res = PostJson("/experiments/compile",
                            {{"dot", "digraph { r [adtkind=root]; a [adtkind=attack]; g [adtkind=goal]; r -> a -> g; }"},
                             {"goal", "g"}});
  EXPECT_EQ(res->status, 400);
  const auto body = nlohmann::json::parse(res->body);
  EXPECT_EQ(body.at("code"), "unusable_branch");
  EXPECT_EQ(body.at("detail").at("nodes"), nlohmann::json::array({"a"}));
}

TEST_F(Api, ScoreMatchesCli) {
  for (const char* tree : {"trees/qwq.dot", "trees/gpt4.dot"}) {
    const auto res = client_->Post("/score", Slurp(Fix(tree)), "text/vnd.graphviz");
    ASSERT_EQ(res->status, 200);
    const auto cli = RunCliWith({"score", Fix(tree), "--json"});
    EXPECT_EQ(cli.code, 0);
    EXPECT_EQ(res->body, cli.out);
  }
  const auto with_ref = PostJson("/score", {{"dot", Slurp(Fix("trees/qwq.dot"))},
                                            {"reference", Slurp(Fix("trees/qwq.reference"))}});
  const auto cli = RunCliWith({"score", Fix("trees/qwq.dot"), "--json", "--reference",
                               Fix("trees/qwq.reference")});
  EXPECT_EQ(with_ref->body, cli.out);
  EXPECT_EQ(nlohmann::json::parse(with_ref->body).at("tree_score"), 71.60);
}

TEST_F(Api, ScoreErrors) {
  const auto bad = client_->Post("/score", "digraph {\n  a [label=];\n}", "text/vnd.graphviz");
  EXPECT_EQ(bad->status, 400);
  const auto body = nlohmann::json::parse(bad->body);
  EXPECT_EQ(body.at("code"), "parse_error");
  EXPECT_EQ(body.at("detail").at("line"), 2);
  const auto empty = client_->Post("/score", "digraph { r [adtkind=root]; }", "text/vnd.graphviz");
  EXPECT_EQ(nlohmann::json::parse(empty->body).at("code"), "empty_tree");
}

TEST_F(Api, ConcurrentSessions) {
  std::vector<std::thread> threads;
  std::vector<int> status(4, 0);
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port_);
      const nlohmann::json body = {{"spec", flow::ToJson(testing::GovCloudSpec())},
                                   {"id", "c" + std::to_string(i)}};
      status[i] = c.Post("/sessions", body.dump(), "application/json")->status;
    });
  }
  for (auto& t : threads) t.join();
  for (int s : status) EXPECT_EQ(s, 201);
  EXPECT_EQ(PostJson("/sessions", {{"spec", flow::ToJson(testing::GovCloudSpec())}, {"id", "c0"}})->status,
            400);
}

class AuthApi : public Api {
 protected:
  void SetUp() override {
    ::setenv("ADFORGE_TEST_API_TOKEN", "tok-123", 1);
    auth_env_ = "ADFORGE_TEST_API_TOKEN";
    Api::SetUp();
  }
  void TearDown() override {
    Api::TearDown();
    ::unsetenv("ADFORGE_TEST_API_TOKEN");
  }
};

TEST_F(AuthApi, RequiresBearerToken) {
  EXPECT_EQ(client_->Get("/healthz")->status, 200);
  EXPECT_EQ(client_->Get("/sessions/x")->status, 401);
  client_->set_bearer_token_auth("tok-123");
  EXPECT_EQ(client_->Get("/sessions/x")->status, 404);
}

TEST(Cli, ScoreTable) {
  const auto r = RunCliWith({"score", Fix("trees/qwq.dot")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("71.60"), std::string::npos);
}

TEST(Cli, ScoreExitCodes) {
  EXPECT_EQ(RunCliWith({"score", "/nonexistent.dot"}).code, 2);
  const auto dir = TempDir("cli_score");
  const auto empty = (dir / "empty.dot").string();
  std::ofstream(empty) << "digraph { r [adtkind=root]; }\n";
  EXPECT_EQ(RunCliWith({"score", empty}).code, 3);
  const auto bad = (dir / "bad.dot").string();
  std::ofstream(bad) << "digraph { r [adtkind=root]; r -> a -> r; }\n";
  const auto r = RunCliWith({"score", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("structure_error"), std::string::npos);
  EXPECT_EQ(RunCliWith({"bogus"}).code, 2);
}

TEST(Cli, ExperimentVerdictExitCodes) {
  const auto tree = Fix("trees/qwq.dot");
  const auto scenario = Fix("scenarios/privesc-defaults.yaml");
  auto run = [&](const std::string& state, const std::string& detector) {
    return RunCliWith({"experiment", "--tree", tree, "--goal", "goal", "--leaf", "ec2_use",
                       "--scenario", scenario, "--state", Fix(state), "--detector",
                       Fix(detector)});
  };
  const auto confirmed = run("scenarios/state.json", "scenarios/detector.yaml");
  EXPECT_EQ(confirmed.code, 0) << confirmed.err;
  EXPECT_EQ(nlohmann::json::parse(confirmed.out).at("hypothesis_verdict"), "Confirmed");
  EXPECT_EQ(run("scenarios/state-no-passrole.json", "scenarios/detector.yaml").code, 5);
  EXPECT_EQ(run("scenarios/state.json", "scenarios/detector-empty.yaml").code, 4);

  const auto dir = TempDir("cli_exp");
  const auto bare = (dir / "bare.dot").string();
  std::ofstream(bare) << "digraph { r [adtkind=root]; a [adtkind=attack]; g [adtkind=goal]; r -> a -> g; }\n";
  const auto unusable = RunCliWith({"experiment", "--tree", bare, "--goal", "g", "--state",
                                    Fix("scenarios/state.json")});
  EXPECT_EQ(unusable.code, kExitUnusableBranch);
  EXPECT_NE(unusable.err.find("a"), std::string::npos);
}

TEST(Cli, CompileOnlyThenRunFromFile) {
  const auto dir = TempDir("cli_compile");
  const auto exp_path = (dir / "exp.yaml").string();
  const auto c = RunCliWith({"experiment", "--tree", Fix("trees/qwq.dot"), "--goal", "goal",
                             "--leaf", "ec2_use", "--compile-only", "--out", exp_path});
  ASSERT_EQ(c.code, 0) << c.err;
  const auto r = RunCliWith({"experiment", "--experiment", exp_path, "--state",
                             Fix("scenarios/state.json"), "--detector",
                             Fix("scenarios/detector.yaml")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, FlowWritesAcceptedTree) {
  const auto dir = TempDir("cli_flow");
  const auto out = (dir / "accepted.dot").string();
  const auto r = RunCliWith({"flow", "--spec", Fix("specs/govcloud.yaml"), "--backend",
                             "mock:" + Fix("transcripts/qwq.json"), "--script",
                             Fix("scripts/qwq_flow.json"), "--state-dir", dir.string(),
                             "--out", out, "--session-id", "cli1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(out), Slurp(Fix("trees/qwq.dot")));
  EXPECT_TRUE(std::filesystem::exists(dir / "sessions" / "cli1.json"));
}

// The canned transcript is reproducible from the reply files and scripts.
TEST(Cli, TranscriptRecordReproducesFixture) {
  const auto out = (TempDir("cli_record") / "t.json").string();
  auto r = RunCliWith({"transcript", "record", "--spec", Fix("specs/govcloud.yaml"), "--script",
                       Fix("scripts/qwq_flow.json"), "--replies-dir",
                       Fix("transcripts/qwq_replies"), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  r = RunCliWith({"transcript", "record", "--spec", Fix("specs/govcloud.yaml"), "--script",
                  Fix("scripts/qwq_full.json"), "--replies-dir",
                  Fix("transcripts/qwq_full_replies"), "--out", out, "--append"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(out), Slurp(Fix("transcripts/qwq.json")));
  EXPECT_EQ(Slurp(out).find("<!--"), std::string::npos);
}

TEST(Cli, FlowInteractive) {
  const auto dir = TempDir("cli_repl");
  const auto r = RunCliWith({"flow", "--spec", Fix("specs/govcloud.yaml"), "--backend",
                             "mock:" + Fix("transcripts/qwq.json"), "--state-dir",
                             dir.string()},
                            "insert\nbranch {\"mode\": \"generalized\"}\nshow\nmerge\nquit\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("branch: phase=AttackContext candidates=1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("digraph qwq"), std::string::npos);
  EXPECT_NE(r.err.find("precondition_failed"), std::string::npos) << r.err;
}

TEST(Cli, FlowBackendAndSpecErrors) {
  const auto dir = TempDir("cli_flow_err");
  EXPECT_EQ(RunCliWith({"flow", "--spec", "/missing.yaml", "--backend", "mock:x"}).code, 2);
  // An empty transcript answers nothing.
  const auto t = (dir / "t.json").string();
  std::ofstream(t) << R"({"format": "adforge-transcript/1", "entries": []})";
  const auto r = RunCliWith({"flow", "--spec", Fix("specs/govcloud.yaml"), "--backend",
                             "mock:" + t, "--state-dir", dir.string()});
  EXPECT_EQ(r.code, 7);
}

}  // namespace
}  // namespace adforge::service
