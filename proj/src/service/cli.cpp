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

#include "adforge/service/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>

#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/store.hpp"
#include "adforge/service/config.hpp"
#include "adforge/service/handlers.hpp"
#include "adforge/service/server.hpp"
#include "adforge/yaml_json.hpp"

namespace adforge::service {

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEmptyTree = 3;

// Reply files may open with an HTML comment (a license header), which is not
// part of the recorded reply.
std::string StripLeadingComment(const std::string& text) {
  if (text.rfind("<!--", 0) != 0) return text;
  const auto end = text.find("-->");
  if (end == std::string::npos) return text;
  const auto body = text.find_first_not_of("\r\n", end + 3);
  return body == std::string::npos ? std::string() : text.substr(body);
}
constexpr int kExitBackend = 7;
constexpr int kExitFlowState = 8;

void Diagnose(std::ostream& err, const Error& e) { err << "error: " << e.code() << ": " << e.what() << "\n"; }

void WriteOutput(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    WriteFileAtomic(path, text);
  }
}

int FlowExitCode(const Error& e) {
  if (dynamic_cast<const BackendError*>(&e)) return kExitBackend;
  if (dynamic_cast<const IllegalTransition*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const NoDotFound*>(&e) || dynamic_cast<const CandidateRejected*>(&e)) {
    return kExitFlowState;
  }
  return kExitInput;
}

nlohmann::json LoadJsonFile(const std::string& path) {
  auto doc = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) throw ValidationError(path + " is not valid JSON");
  return doc;
}

std::string OpName(const nlohmann::json& step) {
  if (!step.is_object() || !step.contains("op") || !step.at("op").is_string()) {
    throw ValidationError("each script step needs an op name");
  }
  return step.at("op").get<std::string>();
}

struct BackendFlags {
  std::string selector;
  std::string endpoint;
  std::string model;
  std::string token_env = "ADFORGE_BACKEND_TOKEN";
  double timeout = 60.0;
  int retries = 2;

  std::unique_ptr<flow::ChatBackend> Make() const {
    if (!selector.empty()) return flow::MakeBackend(selector, std::nullopt);
    if (endpoint.empty()) throw ValidationError("select a backend with --backend mock:<file> or --endpoint");
    flow::BackendConfig cfg{endpoint, model, token_env, timeout, retries};
    return std::make_unique<flow::HttpChatBackend>(cfg);
  }
};

void PrintStep(std::ostream& out, const std::string& op, const flow::FlowSession& s) {
  out << op << ": phase=" << flow::PhaseName(s.phase) << " candidates=" << s.candidates.size()
      << " iteration=" << s.iteration_count << "\n";
}

}  // namespace

int RunCli(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack-defense tree workbench"};
  app.require_subcommand(1);
  std::string catalog_path = DefaultCatalogPath().string();

  // score
  auto* score = app.add_subcommand("score", "Score a DOT tree");
  std::string tree_path, reference_path;
  bool as_json = false;
  score->add_option("tree", tree_path, "DOT file")->required();
  score->add_option("--catalog", catalog_path, "technique catalog JSON");
  score->add_option("--reference", reference_path, "reference order, one node id per line");
  score->add_flag("--json", as_json, "print the report as JSON");

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "Run a tree-generation session");
  std::string spec_path, script_path, state_dir = "state", out_path, session_id;
  std::size_t budget = flow::FlowOptions{}.grounding_budget_words;
  BackendFlags bf;
  flow_cmd->add_option("--spec", spec_path, "prompt spec (YAML or JSON)")->required();
  flow_cmd->add_option("--backend", bf.selector, "mock:<transcript.json>");
  flow_cmd->add_option("--endpoint", bf.endpoint, "chat completion URL");
  flow_cmd->add_option("--model", bf.model, "model name");
  flow_cmd->add_option("--token-env", bf.token_env, "environment variable holding the token");
  flow_cmd->add_option("--timeout", bf.timeout, "request timeout in seconds");
  flow_cmd->add_option("--retries", bf.retries, "retries on 429/5xx/network errors");
  flow_cmd->add_option("--script", script_path, "JSON array of operations to replay");
  flow_cmd->add_option("--state-dir", state_dir, "where sessions are stored");
  flow_cmd->add_option("--out", out_path, "write the accepted tree here");
  flow_cmd->add_option("--session-id", session_id, "session id (default random)");
  flow_cmd->add_option("--catalog", catalog_path, "technique catalog JSON");
  flow_cmd->add_option("--grounding-budget", budget, "words kept from each grounding answer");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Compile and run an SCE experiment");
  std::string goal, leaf, state_path, detector_path, scenario_path, experiment_path, exp_out;
  std::uint64_t seed = 1;
  bool compile_only = false;
  exp_cmd->add_option("--tree", tree_path, "DOT file");
  exp_cmd->add_option("--goal", goal, "goal node id");
  exp_cmd->add_option("--leaf", leaf, "node the branch must pass through");
  exp_cmd->add_option("--state", state_path, "mock cloud state (JSON)");
  exp_cmd->add_option("--detector", detector_path, "detector rules (YAML)");
  exp_cmd->add_option("--scenario", scenario_path, "scenario defaults (YAML)");
  exp_cmd->add_option("--experiment", experiment_path, "experiment file instead of --tree");
  exp_cmd->add_flag("--compile-only", compile_only, "print the compiled experiment and stop");
  exp_cmd->add_option("--out", exp_out, "write the report here");
  exp_cmd->add_option("--seed", seed, "simulation seed");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string config_path, listen, ui_dir, serve_backend, serve_state, auth_env;
  serve->add_option("--config", config_path, "service config (YAML)");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--backend", serve_backend, "mock:<transcript.json>");
  serve->add_option("--state-dir", serve_state, "where sessions are stored");
  serve->add_option("--catalog", catalog_path, "technique catalog JSON");
  serve->add_option("--ui-dir", ui_dir, "static files served under /ui");
  serve->add_option("--auth-token-env", auth_env, "environment variable holding the API token");

  // transcript record
  auto* transcript = app.add_subcommand("transcript", "Author mock transcripts");
  transcript->group("");
  auto* record = transcript->add_subcommand("record", "Record a scripted flow");
  std::string replies_dir, transcript_out;
  bool append = false;
  record->add_option("--spec", spec_path, "prompt spec")->required();
  record->add_option("--script", script_path, "JSON array of operations")->required();
  record->add_option("--replies-dir", replies_dir, "directory of reply files, used in name order")
      ->required();
  record->add_option("--out", transcript_out, "transcript JSON")->required();
  record->add_flag("--append", append, "merge into an existing transcript");
  transcript->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitInput;
  }

  if (score->parsed()) {
    try {
      const auto catalog = metrics::TechniqueCatalog::Load(catalog_path);
      std::optional<metrics::ReferenceOrder> ref;
      if (!reference_path.empty()) ref = metrics::ReferenceOrder::Load(reference_path);
      const auto doc = ScoreDocument(ReadFile(tree_path), catalog, ref);
      if (as_json) {
        out << Render(doc);
      } else {
        out << metrics::FormatTable(metrics::MetricReportFromJson(doc));
      }
      return 0;
    } catch (const EmptyTree& e) {
      Diagnose(err, e);
      return kExitEmptyTree;
    } catch (const Error& e) {
      Diagnose(err, e);
      return kExitInput;
    }
  }

  if (flow_cmd->parsed()) {
    try {
      const auto spec = flow::LoadPromptSpec(spec_path);
      const auto catalog = metrics::TechniqueCatalog::Load(catalog_path);
      auto backend = bf.Make();
      flow::SessionStore store(state_dir);
      flow::Orchestrator orch(*backend, catalog, flow::FlowOptions{budget});
      if (session_id.empty()) session_id = flow::RandomSessionId();
      if (!flow::IsValidSessionId(session_id)) throw ValidationError("invalid session id");
      flow::FlowSession session = orch.CreateSession(spec, session_id);
      out << "session " << session.id << "\n";
      store.Save(session);

      auto run = [&](const std::string& op, const nlohmann::json& args) {
        try {
          if (op == "start") {
            orch.RunGrounding(session);
          } else {
            ApplyFlowOp(orch, session, op, args);
          }
        } catch (...) {
          store.Save(session);
          throw;
        }
        store.Save(session);
        PrintStep(out, op, session);
      };

      run("start", nlohmann::json::object());
      if (!script_path.empty()) {
        const auto script = LoadJsonFile(script_path);
        if (!script.is_array()) throw ValidationError("script must be a JSON array");
        for (const auto& step : script) {
          const std::string op = OpName(step);
          if (op == "start") continue;
          run(op, step);
        }
      } else {
        out << "ops: insert | branch {json} | merge | cosmetics {json} | validate {json} | show | quit\n";
        std::string line;
        while (session.phase != flow::Phase::kDone && std::getline(in, line)) {
          const auto sp = line.find(' ');
          const std::string op = line.substr(0, sp);
          if (op.empty()) continue;
          if (op == "quit") break;
          if (op == "show") {
            out << (session.candidates.empty() ? "(no candidate)\n" : session.candidates.back().dot);
            continue;
          }
          nlohmann::json args = nlohmann::json::object();
          if (sp != std::string::npos) {
            args = nlohmann::json::parse(line.substr(sp + 1), nullptr, false);
            if (args.is_discarded()) {
              err << "error: arguments must be a JSON object\n";
              continue;
            }
          }
          try {
            run(op, args);
          } catch (const Error& e) {
            Diagnose(err, e);
          }
        }
      }
      if (session.accepted_tree) {
        if (!out_path.empty()) {
          WriteFileAtomic(out_path, adtree::EmitDot(*session.accepted_tree));
          out << "accepted tree written to " << out_path << "\n";
        }
      } else {
        err << "note: session ended without an accepted tree\n";
      }
      return 0;
    } catch (const Error& e) {
      Diagnose(err, e);
      return FlowExitCode(e);
    }
  }

  if (exp_cmd->parsed()) {
    try {
      sce::SCEExperiment exp;
      sce::DetectorConfig detector;
      if (!experiment_path.empty()) {
        const auto doc = YamlTextToJson(ReadFile(experiment_path));
        exp = sce::ExperimentFromJson(doc);
        if (doc.contains("detector")) detector = sce::DetectorFromJson(doc.at("detector"));
      } else {
        if (tree_path.empty() || goal.empty()) {
          throw ValidationError("give --experiment or both --tree and --goal");
        }
        const auto defaults = scenario_path.empty() ? sce::BuiltinDefaults()
                                                    : sce::LoadScenarioDefaults(scenario_path);
        const auto tree = adtree::ParseDot(ReadFile(tree_path));
        exp = CompileBranch(tree, goal, leaf.empty() ? std::nullopt : std::optional(leaf), defaults);
      }
      if (compile_only) {
        WriteOutput(exp_out, Render(sce::ToJson(exp)), out);
        return 0;
      }
      if (state_path.empty()) throw ValidationError("--state is required to run an experiment");
      if (!detector_path.empty()) detector = sce::LoadDetector(detector_path);
      const auto report = sce::RunExperiment(exp, sce::LoadState(state_path), detector, seed);
      WriteOutput(exp_out, Render(sce::ToJson(report)), out);
      return ExperimentExitCode(report.verdict);
    } catch (const UnusableBranch& e) {
      Diagnose(err, e);
      return kExitUnusableBranch;
    } catch (const Error& e) {
      Diagnose(err, e);
      return kExitInput;
    }
  }

  if (serve->parsed()) {
    try {
      AppConfig cfg;
      cfg.catalog = catalog_path;
      if (!config_path.empty()) cfg = LoadAppConfig(config_path);
      if (!listen.empty()) std::tie(cfg.listen_host, cfg.listen_port) = ParseListen(listen);
      if (!serve_backend.empty()) {
        cfg.backend = serve_backend;
        cfg.http.reset();
      }
      if (!serve_state.empty()) cfg.state_dir = serve_state;
      if (!ui_dir.empty()) cfg.ui_dir = ui_dir;
      if (!auth_env.empty()) cfg.auth_token_env = auth_env;
      if (serve->count("--catalog")) cfg.catalog = catalog_path;
      cfg.Validate();
      spdlog::set_level(spdlog::level::from_str(cfg.log_level));
      const auto catalog = metrics::TechniqueCatalog::Load(cfg.catalog);
      auto backend = flow::MakeBackend(cfg.backend, cfg.http);
      ApiServer server(cfg, *backend, catalog);
      spdlog::info("listening on {}:{}", cfg.listen_host, cfg.listen_port);
      if (!server.Listen(cfg.listen_host, cfg.listen_port)) {
        err << "error: cannot listen on " << cfg.listen_host << ":" << cfg.listen_port << "\n";
        return 1;
      }
      return 0;
    } catch (const Error& e) {
      Diagnose(err, e);
      return kExitInput;
    }
  }

  if (record->parsed()) {
    try {
      const auto spec = flow::LoadPromptSpec(spec_path);
      const auto catalog = metrics::TechniqueCatalog::Load(catalog_path);
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(replies_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      std::vector<std::string> replies;
      for (const auto& f : files) replies.push_back(StripLeadingComment(ReadFile(f)));
      flow::SequentialBackend seq(replies);
      flow::RecordingBackend rec(seq);
      flow::Orchestrator orch(rec, catalog);
      flow::FlowSession session = orch.StartSession(spec, "record");
      for (const auto& step : LoadJsonFile(script_path)) {
        const std::string op = OpName(step);
        if (op == "start") continue;
        ApplyFlowOp(orch, session, op, step);
      }
      if (rec.entries().size() != replies.size()) {
        throw ValidationError("script used " + std::to_string(rec.entries().size()) + " of " +
                              std::to_string(replies.size()) + " replies");
      }
      nlohmann::json existing = nlohmann::json::object();
      if (append && std::filesystem::exists(transcript_out)) existing = LoadJsonFile(transcript_out);
      WriteFileAtomic(transcript_out, Render(flow::MergeTranscript(existing, rec.entries())));
      out << "recorded " << rec.entries().size() << " exchanges; final phase "
          << flow::PhaseName(session.phase) << "\n";
      return 0;
    } catch (const Error& e) {
      Diagnose(err, e);
      return FlowExitCode(e);
    }
  }
  return kExitInput;
}

}  // namespace adforge::service
