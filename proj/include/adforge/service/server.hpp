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

#include <functional>
#include <memory>
#include <string>

#include "adforge/flow/backend.hpp"
#include "adforge/flow/store.hpp"
#include "adforge/metrics/metrics.hpp"
#include "adforge/service/config.hpp"

namespace httplib {
class Server;
}

namespace adforge::service {

class ApiServer {
 public:
  ApiServer(AppConfig config, flow::ChatBackend& backend,
            const metrics::TechniqueCatalog& catalog);
  ~ApiServer();

  // Replaces the random session id source (tests use a counter).
  void set_id_generator(std::function<std::string()> gen) { next_id_ = std::move(gen); }

  // Blocks until Stop(). Returns false when the address cannot be bound.
  bool Listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it, or -1.
  int BindAnyPort(const std::string& host);
  // Serves on a socket bound by BindAnyPort; blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

  httplib::Server& http() { return *http_; }

 private:
  void Routes();

  AppConfig config_;
  flow::ChatBackend& backend_;
  const metrics::TechniqueCatalog& catalog_;
  flow::SessionStore store_;
  std::unique_ptr<httplib::Server> http_;
  std::function<std::string()> next_id_;
};

}  // namespace adforge::service
