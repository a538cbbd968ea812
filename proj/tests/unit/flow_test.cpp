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

#include <atomic>
#include <thread>

#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/backend.hpp"
#include "adforge/flow/extract.hpp"
#include "adforge/flow/prompt.hpp"
#include "adforge/flow/session.hpp"
#include "adforge/flow/store.hpp"
#include "adforge/service/handlers.hpp"
#include "support/common.hpp"

namespace adforge::flow {
namespace {

using testing::Catalog;
using testing::FixturePath;
using testing::GovCloudSpec;
using testing::Slurp;

std::string Fence(const std::string& dot) { return "```dot\n" + dot + "```\n"; }

const std::string kSmallTree =
    "digraph s {\n  r [adtkind=root];\n  svc [adtkind=service, label=\"AWS EC2\"];\n"
    "  a [adtkind=attack, cmd=\"aws sts get-caller-identity\"];\n"
    "  a2 [adtkind=attack];\n"
    "  g [adtkind=goal, label=\"Privilege escalation\"];\n"
    "  r -> svc -> a -> g;\n  svc -> a2 -> g;\n}\n";

TEST(PromptSpec, LoadsFixture) {
  const auto spec = GovCloudSpec();
  ASSERT_EQ(spec.components.size(), 3u);
  EXPECT_EQ(spec.components[0].technology, "AWS EC2");
  EXPECT_EQ(spec.components[0].safeguards.at(0), "Amazon GuardDuty to detect anomalous accesses");
  EXPECT_EQ(spec.tree_root, "Cloud-based supply chain System");
  EXPECT_EQ(PromptSpecFromJson(ToJson(spec)), spec);
}

TEST(PromptSpec, RejectsMissingFields) {
  EXPECT_THROW(PromptSpecFromText("system_context: x\ncomponents: []\nattack_goals: [g]\ntree_root: r\n"),
               ValidationError);
  EXPECT_THROW(PromptSpecFromText("system_context: ''\ncomponents: [a]\nattack_goals: [g]\ntree_root: r\n"),
               ValidationError);
  EXPECT_THROW(PromptSpecFromText("system_context: x\ncomponents: [a]\nattack_goals: []\ntree_root: r\n"),
               ValidationError);
  EXPECT_NO_THROW(PromptSpecFromText("system_context: x\ncomponents: [a]\nattack_goals: [g]\ntree_root: r\n"));
}

TEST(Prompt, InsertPromptHasSectionsInOrder) {
  const auto spec = GovCloudSpec();
  const std::string p = RenderInsertPrompt(spec);
  const auto sys = p.find("System Context:");
  const auto comp = p.find("Component List:");
  const auto goals = p.find("Attack Goals:");
  const auto root = p.find("Tree Root:");
  ASSERT_NE(sys, std::string::npos);
  EXPECT_LT(sys, comp);
  EXPECT_LT(comp, goals);
  EXPECT_LT(goals, root);
  for (const char* s : {"AWS EC2", "AWS CodeBuild", "Amazon CodeGuru",
                        "Amazon GuardDuty to detect anomalous accesses", "Privilege escalation",
                        "Cloud-based supply chain System"}) {
    EXPECT_NE(p.find(s), std::string::npos) << s;
  }
  EXPECT_NE(p.find("fenced code block tagged dot"), std::string::npos);
  EXPECT_EQ(p, RenderInsertPrompt(GovCloudSpec()));
}

TEST(Prompt, GroundingQuestions) {
  ASSERT_EQ(GroundingQuestions().size(), 3u);
  EXPECT_EQ(GroundingQuestions()[0], "What is application security?");
  EXPECT_EQ(GroundingQuestions()[1], "What is threat modeling?");
  EXPECT_EQ(GroundingQuestions()[2], "What is threat modeling using attack trees?");
}

TEST(Prompt, BranchPromptModes) {
  const auto spec = GovCloudSpec();
  const auto gen = RenderBranchPrompt(spec, BranchMode::kGeneralized, std::string("AWS EC2"), {});
  EXPECT_NE(gen.find("AWS EC2"), std::string::npos);
  const auto spc = RenderBranchPrompt(spec, BranchMode::kSpecific, std::string("AWS EC2"),
                                      std::string("UNIQUE-WRITEUP-TEXT"));
  EXPECT_NE(spc.find("UNIQUE-WRITEUP-TEXT"), std::string::npos);
  EXPECT_NE(gen, spc);
}

TEST(Prompt, TruncateWords) {
  EXPECT_EQ(TruncateWords("a b c d", 2), "a b ...");
  EXPECT_EQ(TruncateWords("a b", 2), "a b");
  EXPECT_EQ(TruncateWords("", 3), "");
}

TEST(Extract, FencedBlock) {
  EXPECT_EQ(ExtractDotBlocks("```dot\ndigraph{a->b}\n```"), std::vector<std::string>{"digraph{a->b}"});
}

TEST(Extract, TwoBlocksInOrder) {
  const auto blocks = ExtractDotBlocks("first\n```dot\ndigraph one {}\n```\nthen\n```\ndigraph two {}\n```\n");
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0], "digraph one {}");
  EXPECT_EQ(blocks[1], "digraph two {}");
}

TEST(Extract, ProseMentioningDigraphYieldsNothing) {
  EXPECT_TRUE(ExtractDotBlocks("A digraph is a directed graph.").empty());
  EXPECT_TRUE(ExtractDotBlocks("```python\nprint('digraph')\n```").empty());
}

TEST(Extract, UnfencedWholeReply) {
  EXPECT_EQ(ExtractDotBlocks("  digraph x { a -> b }\n"), std::vector<std::string>{"digraph x { a -> b }"});
  EXPECT_EQ(ExtractDotBlocks("strict digraph { }"), std::vector<std::string>{"strict digraph { }"});
}

TEST(MockBackend, ReplaysByPromptAndOccurrence) {
  MockBackend mock({{"", "hello", "one"}, {"", "hello", "two"}});
  std::vector<Message> conv{{Role::kUser, "hello"}};
  EXPECT_EQ(mock.Complete(conv), "one");
  conv.push_back({Role::kAssistant, "one"});
  conv.push_back({Role::kUser, "hello"});
  EXPECT_EQ(mock.Complete(conv), "two");
  conv.push_back({Role::kAssistant, "two"});
  conv.push_back({Role::kUser, "hello"});
  EXPECT_EQ(mock.Complete(conv), "two");
  EXPECT_EQ(mock.calls(), 3u);
  try {
    mock.Complete({{Role::kUser, "unknown"}});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(MockBackend, TranscriptFormatChecked) {
  EXPECT_THROW(MockBackend::FromJson({{"format", "other"}}), ValidationError);
  EXPECT_NO_THROW(MockBackend::FromJson({{"format", kTranscriptFormat}, {"entries", nlohmann::json::array()}}));
}

TEST(MockBackend, PromptKeyIsSha256) {
  EXPECT_EQ(PromptKey("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Transcript, MergeDetectsConflicts) {
  const std::vector<MockBackend::Entry> a{{PromptKey("p"), "p", "r1"}};
  const auto doc = MergeTranscript(nlohmann::json::object(), a);
  EXPECT_EQ(doc.at("entries").size(), 1u);
  EXPECT_EQ(MergeTranscript(doc, a).at("entries").size(), 1u);
  const std::vector<MockBackend::Entry> b{{PromptKey("p"), "p", "other"}};
  EXPECT_THROW(MergeTranscript(doc, b), ValidationError);
}

TEST(BackendConfig, Validates) {
  BackendConfig c{"http://127.0.0.1:1/v1", "m"};
  EXPECT_NO_THROW(c.Validate());
  c.timeout_seconds = 0;
  EXPECT_THROW(c.Validate(), ValidationError);
  c.timeout_seconds = 1;
  c.max_retries = -1;
  EXPECT_THROW(c.Validate(), ValidationError);
}

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpBackend, RetriesThenFails) {
  std::atomic<int> hits{0};
  LocalServer srv;
  srv.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  HttpChatBackend backend({srv.url("/v1/chat"), "m", "ADFORGE_TEST_UNSET_TOKEN", 5, 2});
  try {
    backend.Complete({{Role::kUser, "hi"}});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 500);
  }
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpBackend, SendsModelMessagesAndBearerToken) {
  ::setenv("ADFORGE_TEST_TOKEN", "s3cret", 1);
  std::string auth, body;
  LocalServer srv;
  int calls = 0;
  srv.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    if (++calls == 1) {
      res.status = 429;
      return;
    }
    auth = req.get_header_value("Authorization");
    body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"answer"}}]})", "application/json");
  });
  HttpChatBackend backend({srv.url("/v1/chat"), "qwq", "ADFORGE_TEST_TOKEN", 5, 2});
  EXPECT_EQ(backend.Complete({{Role::kUser, "hi"}}), "answer");
  EXPECT_EQ(auth, "Bearer s3cret");
  const auto doc = nlohmann::json::parse(body);
  EXPECT_EQ(doc.at("model"), "qwq");
  EXPECT_EQ(doc.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(doc.at("messages").at(0).at("content"), "hi");
  ::unsetenv("ADFORGE_TEST_TOKEN");
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
  int calls = 0;
  LocalServer srv;
  srv.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpChatBackend backend({srv.url("/v1/chat"), "m", "X_UNSET", 5, 3});
  EXPECT_THROW(backend.Complete({{Role::kUser, "hi"}}), BackendError);
  EXPECT_EQ(calls, 1);
}

TEST(PhaseMachine, DeclaredTransitions) {
  using P = Phase;
  EXPECT_TRUE(IsLegalTransition(P::kAppSecContext, P::kPromptContext));
  EXPECT_TRUE(IsLegalTransition(P::kPromptContext, P::kInsertPrompt));
  EXPECT_TRUE(IsLegalTransition(P::kInsertPrompt, P::kAttackContext));
  EXPECT_TRUE(IsLegalTransition(P::kAttackContext, P::kCosmeticContext));
  EXPECT_TRUE(IsLegalTransition(P::kCosmeticContext, P::kAttackContext));
  EXPECT_TRUE(IsLegalTransition(P::kExpertValidation, P::kAttackContext));
  EXPECT_TRUE(IsLegalTransition(P::kAttackContext, P::kDone));
  EXPECT_FALSE(IsLegalTransition(P::kAppSecContext, P::kAttackContext));
  EXPECT_FALSE(IsLegalTransition(P::kDone, P::kAttackContext));
  EXPECT_FALSE(IsLegalTransition(P::kInsertPrompt, P::kDone));
  for (auto p : {P::kAppSecContext, P::kPromptContext, P::kInsertPrompt, P::kAttackContext,
                 P::kCosmeticContext, P::kExpertValidation, P::kDone}) {
    EXPECT_EQ(PhaseFromName(PhaseName(p)), p);
  }
}

struct Flow : ::testing::Test {
  MockBackend backend{{}, {"A short summary answer."}};
  Orchestrator orch{backend, Catalog()};
};

TEST_F(Flow, StartRecordsGroundingTurns) {
  const FlowSession s = orch.StartSession(GovCloudSpec(), "s1");
  EXPECT_EQ(s.phase, Phase::kPromptContext);
  ASSERT_EQ(s.transcript.size(), 6u);
  EXPECT_EQ(s.transcript[0].role, Role::kUser);
  EXPECT_NE(s.transcript[0].text.find("What is application security?"), std::string::npos);
  EXPECT_EQ(s.transcript[5].role, Role::kAssistant);
}

TEST_F(Flow, InvalidSpecFailsBeforeAnyCall) {
  auto spec = GovCloudSpec();
  spec.components.clear();
  EXPECT_THROW(orch.StartSession(spec, "s"), ValidationError);
  EXPECT_EQ(backend.calls(), 0u);
}

TEST(FlowBackendErrors, GroundingFailureLeavesResumableSession) {
  // Replies only to the first question.
  MockBackend partial({{"", RenderGroundingPrompt(0), "summary"}});
  Orchestrator orch(partial, Catalog());
  FlowSession s = orch.CreateSession(GovCloudSpec(), "g");
  EXPECT_THROW(orch.RunGrounding(s), BackendError);
  EXPECT_EQ(s.phase, Phase::kAppSecContext);
  EXPECT_EQ(s.transcript.size(), 2u);

  MockBackend full({}, {"summary"});
  Orchestrator resume(full, Catalog());
  resume.RunGrounding(s);
  EXPECT_EQ(s.phase, Phase::kPromptContext);
  EXPECT_EQ(s.transcript.size(), 6u);
  EXPECT_EQ(full.calls(), 2u);
}

TEST(FlowSequence, BranchStyleRefineAccept) {
  SequentialBackend seq({"g1", "g2", "g3", "ok", Fence(kSmallTree), "no tree here",
                         Fence(Slurp(FixturePath("trees/gpt4.dot")))});
  Orchestrator orch(seq, Catalog());
  FlowSession s = orch.StartSession(GovCloudSpec(), "x");
  EXPECT_THROW(orch.SubmitValidation(s, Verdict::kAccept, {}), PreconditionError);
  EXPECT_THROW(orch.ApplyCosmetics(s, adtree::StyleSheet{{{adtree::NodeKind::kAttack, "#ADD8E6"}}}, {}),
               PreconditionError);
  EXPECT_THROW(orch.RequestBranch(s, BranchMode::kGeneralized, {}, {}), IllegalTransition);
  orch.InsertPrompt(s);
  EXPECT_EQ(s.phase, Phase::kInsertPrompt);
  EXPECT_THROW(orch.RequestBranch(s, BranchMode::kSpecific, std::string("AWS EC2"), {}),
               ValidationError);

  const auto& c = orch.RequestBranch(s, BranchMode::kGeneralized, std::string("AWS EC2"), {});
  EXPECT_EQ(c.tree.CountKind(adtree::NodeKind::kAttack), 2u);
  ASSERT_TRUE(c.report.has_value());
  EXPECT_EQ(s.iteration_count, 1);
  EXPECT_EQ(s.phase, Phase::kAttackContext);

  adtree::StyleSheet sheet;
  sheet.fill[adtree::NodeKind::kAttack] = "#ADD8E6";
  const auto& styled = orch.ApplyCosmetics(s, sheet, {});
  EXPECT_EQ(s.phase, Phase::kCosmeticContext);
  EXPECT_EQ(styled.tree.edges(), s.candidates[0].tree.edges());
  EXPECT_NE(styled.dot.find("fillcolor=\"#ADD8E6\""), std::string::npos);

  const std::size_t turns = s.transcript.size();
  EXPECT_THROW(orch.SubmitValidation(s, Verdict::kRefine, std::string("more detail")), NoDotFound);
  EXPECT_EQ(s.transcript.size(), turns + 2);
  EXPECT_EQ(s.candidates.size(), 2u);
  EXPECT_EQ(s.phase, Phase::kExpertValidation);

  EXPECT_THROW(orch.SubmitValidation(s, Verdict::kRefine, {}), ValidationError);
  orch.SubmitValidation(s, Verdict::kRefine, std::string("goal node is disconnected"));
  EXPECT_EQ(s.candidates.size(), 3u);
  EXPECT_EQ(s.iteration_count, 2);
  EXPECT_EQ(s.phase, Phase::kAttackContext);

  orch.SubmitValidation(s, Verdict::kAccept, {});
  EXPECT_EQ(s.phase, Phase::kDone);
  ASSERT_TRUE(s.accepted_tree.has_value());
  EXPECT_EQ(*s.accepted_tree, s.candidates.back().tree);
  EXPECT_THROW(orch.SubmitValidation(s, Verdict::kAccept, {}), IllegalTransition);
}

TEST(FlowSequence, RejectedCandidateCarriesRawBlock) {
  const std::string cyclic = "digraph c {\n  r [adtkind=root];\n  r -> a -> b -> a;\n}";
  SequentialBackend seq({"g1", "g2", "g3", "ok", Fence(cyclic + "\n")});
  Orchestrator orch(seq, Catalog());
  FlowSession s = orch.StartSession(GovCloudSpec(), "x");
  orch.InsertPrompt(s);
  try {
    orch.RequestBranch(s, BranchMode::kGeneralized, {}, {});
    FAIL();
  } catch (const CandidateRejected& e) {
    EXPECT_EQ(e.raw_block(), cyclic);
  }
  EXPECT_TRUE(s.candidates.empty());
  EXPECT_EQ(s.phase, Phase::kInsertPrompt);
}

TEST(FlowSequence, CannedFullTreeHasEighteenAttacks) {
  auto mock = MockBackend::Load(FixturePath("transcripts/qwq.json"));
  Orchestrator orch(mock, Catalog());
  FlowSession s = orch.StartSession(GovCloudSpec(), "full");
  orch.InsertPrompt(s);
  const auto& c = orch.RequestBranch(s, BranchMode::kGeneralized, {}, {});
  EXPECT_EQ(c.tree.CountKind(adtree::NodeKind::kAttack), 18u);
  EXPECT_EQ(c.report->tree_score, 7160);
}

TEST(FlowSequence, CannedRestructureRemovesRedundantEdge) {
  auto mock = MockBackend::Load(FixturePath("transcripts/qwq.json"));
  Orchestrator orch(mock, Catalog());
  FlowSession s = orch.StartSession(GovCloudSpec(), "qwq");
  const auto script = nlohmann::json::parse(Slurp(FixturePath("scripts/qwq_flow.json")));
  auto has_edge = [](const adtree::ADTree& t, const std::string& a, const std::string& b) {
    const auto kids = t.children(a);
    return std::find(kids.begin(), kids.end(), b) != kids.end();
  };
  for (const auto& step : script) {
    const std::string op = step.at("op");
    if (op == "start") continue;
    service::ApplyFlowOp(orch, s, op, step);
    if (op == "merge") {
      EXPECT_TRUE(has_edge(s.candidates.back().tree, "ec2_spot", "goal"));
      EXPECT_EQ(s.candidates.back().tree.CountKind(adtree::NodeKind::kAttack), 18u);
    }
    if (op == "cosmetics" && step.contains("restructure")) {
      EXPECT_FALSE(has_edge(s.candidates.back().tree, "ec2_spot", "goal"));
    }
  }
  EXPECT_EQ(s.phase, Phase::kDone);
  EXPECT_EQ(adtree::EmitDot(*s.accepted_tree), Slurp(FixturePath("trees/qwq.dot")));
}

TEST(SessionJson, RoundTrip) {
  SequentialBackend seq({"g1", "g2", "g3", "ok", Fence(kSmallTree)});
  Orchestrator orch(seq, Catalog());
  FlowSession s = orch.StartSession(GovCloudSpec(), "rt");
  orch.InsertPrompt(s);
  orch.RequestBranch(s, BranchMode::kGeneralized, std::string("AWS EC2"), {});
  orch.SubmitValidation(s, Verdict::kAccept, {});
  const auto doc = ToJson(s);
  EXPECT_EQ(doc.at("schema_version"), kSessionSchemaVersion);
  EXPECT_EQ(SessionFromJson(doc), s);
  EXPECT_EQ(SessionFromJson(nlohmann::json::parse(doc.dump())), s);
}

TEST(Store, SaveLoadAndIds) {
  const auto dir = std::filesystem::temp_directory_path() / "adforge_store_test";
  std::filesystem::remove_all(dir);
  SessionStore store(dir);
  MockBackend backend({}, {"x"});
  Orchestrator orch(backend, Catalog());
  const auto s = orch.StartSession(GovCloudSpec(), "abc-1");
  store.Save(s);
  EXPECT_TRUE(store.Exists("abc-1"));
  EXPECT_EQ(store.Load("abc-1"), s);
  EXPECT_THROW(store.Load("nope"), NotFound);
  EXPECT_TRUE(IsValidSessionId("abc_DEF-9"));
  EXPECT_FALSE(IsValidSessionId("../etc"));
  EXPECT_FALSE(IsValidSessionId(""));
  EXPECT_EQ(RandomSessionId().size(), 16u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace adforge::flow
