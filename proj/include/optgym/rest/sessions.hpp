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

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "optgym/env/env.hpp"

namespace optgym::rest {

/// An error with its HTTP status and machine-readable code.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  nlohmann::json body() const { return {{"code", code_}, {"message", what()}}; }

 private:
  int status_;
  std::string code_;
};

/// HTTP status for a framework error code.
int http_status(ErrorCode code);

struct TreeNode {
  std::int64_t id = 0;
  std::optional<std::int64_t> parent;
  std::optional<std::string> action;
  double reward = 0;
  double cumulative_reward = 0;
  std::int64_t instcount = 0;
  std::string digest;
  std::vector<std::string> path;  // action names from the root

  nlohmann::json to_json() const;
};

struct SessionConfig {
  std::size_t max_sessions = 1000;
  std::chrono::milliseconds idle_ttl = std::chrono::minutes(30);
  /// Base options for every environment (compiler, service settings).
  MakeOptions make_options;
  std::function<std::chrono::steady_clock::time_point()> now = [] { return std::chrono::steady_clock::now(); };
};

/// Server-side sessions, each an environment plus an append-only tree of the
/// states explored from its root. Calls on distinct sessions run
/// concurrently; calls on one session are serialized.
class SessionManager {
 public:
  explicit SessionManager(SessionConfig config = {});
  ~SessionManager();

  /// {env, benchmark, reward_space?} -> {session_id, env, benchmark,
  /// action_space, observation_spaces, root_node}.
  nlohmann::json create(const nlohmann::json& request);
  /// {action: name or index} -> {node, duplicate, duplicate_of}.
  nlohmann::json step(const std::string& session_id, std::int64_t node, const nlohmann::json& request);
  /// {session_id, root, nodes: {id: node}}.
  nlohmann::json tree(const std::string& session_id);
  /// {metric, node, values}: the metric along the root-to-node path.
  nlohmann::json series(const std::string& session_id, std::int64_t node, const std::string& metric);
  void remove(const std::string& session_id);
  static nlohmann::json list_datasets();

  std::size_t size() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id);
  void expire_idle();

  SessionConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::set<std::string> expired_;
};

}  // namespace optgym::rest
