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

#include "adforge/service/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/service/handlers.hpp"

namespace adforge::service {

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kSessionPath = "/sessions/([A-Za-z0-9_-]+)";

nlohmann::json BodyJson(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto doc = nlohmann::json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("request body must be a JSON object");
  return doc;
}

void Reply(httplib::Response& res, int status, const nlohmann::json& doc) {
  res.status = status;
  res.set_content(Render(doc), kJson);
}

// Runs `fn`, mapping library errors to {code, message, detail} bodies.
template <typename Fn>
void Guard(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    Reply(res, HttpStatusFor(e), ErrorBody(e));
  } catch (const nlohmann::json::exception& e) {
    Reply(res, 400, ErrorBody(ValidationError(std::string("malformed request: ") + e.what())));
  } catch (const std::exception& e) {
    spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
    Reply(res, 500, ErrorBody(Error("internal_error", "internal error")));
  }
}

std::optional<std::string> OptString(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<std::string>();
}

std::optional<metrics::ReferenceOrder> ReferenceFrom(const nlohmann::json& doc) {
  if (!doc.contains("reference") || doc.at("reference").is_null()) return std::nullopt;
  const auto& r = doc.at("reference");
  if (r.is_string()) return metrics::ReferenceOrder::FromLines(r.get<std::string>());
  std::string lines;
  for (const auto& item : r) lines += item.get<std::string>() + "\n";
  return metrics::ReferenceOrder::FromLines(lines);
}

}  // namespace

ApiServer::ApiServer(AppConfig config, flow::ChatBackend& backend,
                     const metrics::TechniqueCatalog& catalog)
    : config_(std::move(config)),
      backend_(backend),
      catalog_(catalog),
      store_(config_.state_dir),
      http_(std::make_unique<httplib::Server>()),
      next_id_(flow::RandomSessionId) {
  Routes();
}

ApiServer::~ApiServer() = default;

void ApiServer::Routes() {
  auto& s = *http_;

  if (config_.auth_token_env) {
    const char* token = std::getenv(config_.auth_token_env->c_str());
    if (token && *token) {
      const std::string expected = std::string("Bearer ") + token;
      s.set_pre_routing_handler([expected](const httplib::Request& req, httplib::Response& res) {
        if (req.path == "/healthz" || req.get_header_value("Authorization") == expected) {
          return httplib::Server::HandlerResponse::Unhandled;
        }
        Reply(res, 401, ErrorBody(Error("unauthorized", "missing or invalid bearer token")));
        return httplib::Server::HandlerResponse::Handled;
      });
    }
  }
  if (config_.ui_dir) s.set_mount_point("/ui", config_.ui_dir->string());
  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });

  s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, {{"schema_version", kApiSchemaVersion}, {"status", "ok"}});
  });

  s.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    Guard(req, res, [&] {
      const auto body = BodyJson(req);
      if (!body.contains("spec")) throw ValidationError("request needs a spec");
      const auto spec = flow::PromptSpecFromJson(body.at("spec"));
      std::string id = OptString(body, "id").value_or(next_id_());
      if (!flow::IsValidSessionId(id)) throw ValidationError("invalid session id");
      auto lock = store_.Lock(id);
      if (store_.Exists(id)) throw ValidationError("session '" + id + "' already exists");
      flow::Orchestrator orch(backend_, catalog_);
      flow::FlowSession session = orch.CreateSession(spec, id);
      store_.Save(session);
      try {
        orch.RunGrounding(session);
      } catch (...) {
        store_.Save(session);
        throw;
      }
      store_.Save(session);
      Reply(res, 201, flow::ToJson(session));
    });
  });

  s.Get(kSessionPath, [this](const httplib::Request& req, httplib::Response& res) {
    Guard(req, res, [&] {
      const std::string id = req.matches[1];
      auto lock = store_.Lock(id);
      Reply(res, 200, flow::ToJson(store_.Load(id)));
    });
  });

  auto session_op = [this](const std::string& op) {
    return [this, op](const httplib::Request& req, httplib::Response& res) {
      Guard(req, res, [&] {
        const std::string id = req.matches[1];
        const auto body = BodyJson(req);
        auto lock = store_.Lock(id);
        const flow::FlowSession before = store_.Load(id);
        flow::FlowSession session = before;
        flow::Orchestrator orch(backend_, catalog_);
        try {
          if (op == "resume") {
            orch.RunGrounding(session);
          } else {
            ApplyFlowOp(orch, session, op, body);
          }
        } catch (...) {
          if (!(session == before)) store_.Save(session);
          throw;
        }
        store_.Save(session);
        Reply(res, 200, flow::ToJson(session));
      });
    };
  };
  for (const char* op : {"insert", "branch", "merge", "cosmetics", "validate", "resume"}) {
    s.Post(std::string(kSessionPath) + "/" + op, session_op(op));
  }

  s.Get(std::string(kSessionPath) + "/tree.dot",
        [this](const httplib::Request& req, httplib::Response& res) {
          Guard(req, res, [&] {
            const std::string id = req.matches[1];
            auto lock = store_.Lock(id);
            const flow::FlowSession session = store_.Load(id);
            std::string dot;
            if (req.has_param("candidate")) {
              const auto idx = std::stoul(req.get_param_value("candidate"));
              if (idx >= session.candidates.size()) throw NotFound("no such candidate");
              dot = session.candidates[idx].dot;
            } else if (session.accepted_tree) {
              dot = adtree::EmitDot(*session.accepted_tree);
            } else if (!session.candidates.empty()) {
              dot = session.candidates.back().dot;
            } else {
              throw NotFound("session '" + id + "' has no tree yet");
            }
            res.status = 200;
            res.set_content(dot, "text/vnd.graphviz");
          });
        });

  s.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
    Guard(req, res, [&] {
      const std::string type = req.get_header_value("Content-Type");
      if (type.rfind("text/", 0) == 0) {
        Reply(res, 200, ScoreDocument(req.body, catalog_, std::nullopt));
        return;
      }
      const auto body = BodyJson(req);
      if (!body.contains("dot")) throw ValidationError("request needs a dot field");
      Reply(res, 200, ScoreDocument(body.at("dot").get<std::string>(), catalog_, ReferenceFrom(body)));
    });
  });

  auto tree_from = [this](const nlohmann::json& body) {
    if (body.contains("dot")) return adtree::ParseDot(body.at("dot").get<std::string>());
    if (body.contains("session_id")) {
      const std::string id = body.at("session_id").get<std::string>();
      auto lock = store_.Lock(id);
      const auto session = store_.Load(id);
      if (!session.accepted_tree) throw PreconditionError("session '" + id + "' has no accepted tree");
      return *session.accepted_tree;
    }
    throw ValidationError("request needs dot or session_id");
  };
  auto compile = [tree_from](const nlohmann::json& body) {
    const auto tree = tree_from(body);
    const auto defaults = body.contains("scenario") ? sce::ScenarioDefaultsFromJson(body.at("scenario"))
                                                    : sce::BuiltinDefaults();
    if (!body.contains("goal")) throw ValidationError("request needs a goal");
    return CompileBranch(tree, body.at("goal").get<std::string>(), OptString(body, "leaf_hint"),
                         defaults);
  };

  s.Post("/experiments/compile", [compile](const httplib::Request& req, httplib::Response& res) {
    Guard(req, res, [&] {
      const auto exp = compile(BodyJson(req));
      Reply(res, 200, {{"schema_version", kApiSchemaVersion}, {"experiment", sce::ToJson(exp)}});
    });
  });

  s.Post("/experiments/run", [compile](const httplib::Request& req, httplib::Response& res) {
    Guard(req, res, [&] {
      const auto body = BodyJson(req);
      const auto exp = body.contains("experiment") ? sce::ExperimentFromJson(body.at("experiment"))
                                                   : compile(body);
      if (!body.contains("state")) throw ValidationError("request needs a state");
      const auto state = sce::StateFromJson(body.at("state"));
      const auto detector = sce::DetectorFromJson(body.value("detector", nlohmann::json()));
      const auto seed = body.value("seed", std::uint64_t{1});
      Reply(res, 200, sce::ToJson(sce::RunExperiment(exp, state, detector, seed)));
    });
  });
}

bool ApiServer::Listen(const std::string& host, int port) { return http_->listen(host, port); }

int ApiServer::BindAnyPort(const std::string& host) { return http_->bind_to_any_port(host); }

bool ApiServer::ListenAfterBind() { return http_->listen_after_bind(); }

void ApiServer::Stop() { http_->stop(); }

void ApiServer::WaitUntilReady() const { http_->wait_until_ready(); }

}  // namespace adforge::service
