// Copyright 2026 The optgym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optgym/rest/server.hpp"

#include "httplib.h"
#include "optgym/common/error.hpp"

namespace optgym::rest {
namespace {

using json = nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ApiError(400, "invalid-argument", std::string("malformed JSON body: ") + e.what());
  }
}

std::int64_t node_id(const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ApiError(404, "node-not-found", "no node " + text);
}

// Runs `fn` and converts its result or error into the response.
template <typename Fn>
httplib::Server::Handler handle(int ok_status, Fn fn) {
  return [ok_status, fn](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, ok_status, fn(req));
    } catch (const ApiError& e) {
      reply(res, e.status(), e.body());
    } catch (const Error& e) {
      reply(res, http_status(e.code()), {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"code", "internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

RestServer::RestServer(ServerConfig config)
    : sessions_(std::move(config.sessions)), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Post("/api/v1/sessions", handle(201, [this](const auto& req) { return sessions_.create(parse_body(req)); }));
  s.Get("/api/v1/datasets", handle(200, [](const auto&) { return SessionManager::list_datasets(); }));
  s.Get(R"(/api/v1/sessions/([^/]+)/tree)",
        handle(200, [this](const auto& req) { return sessions_.tree(req.matches[1]); }));
  s.Post(R"(/api/v1/sessions/([^/]+)/nodes/([^/]+)/step)", handle(201, [this](const auto& req) {
           return sessions_.step(req.matches[1], node_id(req.matches[2]), parse_body(req));
         }));
  s.Get(R"(/api/v1/sessions/([^/]+)/nodes/([^/]+)/series)", handle(200, [this](const auto& req) {
          const std::string metric = req.has_param("metric") ? req.get_param_value("metric") : "";
          return sessions_.series(req.matches[1], node_id(req.matches[2]), metric);
        }));
  s.Delete(R"(/api/v1/sessions/([^/]+))", handle(200, [this](const auto& req) {
             sessions_.remove(req.matches[1]);
             return json{{"deleted", std::string(req.matches[1])}};
           }));
  if (config.static_dir && !s.set_mount_point("/", config.static_dir->string())) {
    throw Error(ErrorCode::invalid_argument, "static directory not found: " + config.static_dir->string());
  }
}

RestServer::~RestServer() { stop(); }

int RestServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io_failure, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void RestServer::serve() { server_->listen_after_bind(); }

void RestServer::stop() {
  if (server_) server_->stop();
}

}  // namespace optgym::rest
