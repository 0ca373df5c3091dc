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

#include "optgym/rest/sessions.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "optgym/common/error.hpp"
#include "optgym/datasets/datasets.hpp"
#include "optgym/env/registry.hpp"

namespace optgym::rest {
namespace {

using json = nlohmann::json;

// Default reward per backend and the observation that reports its cost.
struct Metrics {
  std::string reward;
  std::string instcount;
};

Metrics metrics_for(const std::string& env_id, const std::optional<std::string>& reward) {
  const EnvSpec& spec = env_spec(env_id);
  const std::string id = reward.value_or(spec.backend == "gcc" ? "obj_size" : "InstructionCount");
  for (const auto& r : spec.rewards) {
    if (r.id == id) return {r.id, r.metric};
  }
  throw Error(ErrorCode::unknown_space, "reward space " + id);
}

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

ApiError api_error(const Error& e) { return ApiError(http_status(e.code()), std::string(to_string(e.code())), e.detail()); }

std::string required_string(const json& request, const char* key) {
  if (!request.is_object() || !request.contains(key) || !request.at(key).is_string()) {
    throw ApiError(400, "invalid-argument", std::string("request needs a string '") + key + "'");
  }
  return request.at(key).get<std::string>();
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_environment:
    case ErrorCode::unknown_space:
    case ErrorCode::unknown_benchmark:
    case ErrorCode::unknown_dataset:
    case ErrorCode::out_of_range_action:
    case ErrorCode::invalid_argument:
    case ErrorCode::malformed_program:
    case ErrorCode::parse_error:
    case ErrorCode::compile_error:
      return 400;
    case ErrorCode::session_not_found:
      return 404;
    case ErrorCode::session_expired:
      return 410;
    case ErrorCode::session_cap_exceeded:
    case ErrorCode::resource_exhausted:
      return 429;
    case ErrorCode::backend_unavailable:
    case ErrorCode::backend_crash:
    case ErrorCode::spawn_failure:
    case ErrorCode::start_timeout:
    case ErrorCode::timeout:
    case ErrorCode::compiler_not_found:
      return 503;
    default:
      return 500;
  }
}

json TreeNode::to_json() const {
  return {{"id", id},
          {"parent", parent ? json(*parent) : json(nullptr)},
          {"action", action ? json(*action) : json(nullptr)},
          {"reward", reward},
          {"cumulative_reward", cumulative_reward},
          {"instcount", instcount},
          {"digest", digest}};
}

struct SessionManager::Session {
  std::mutex mu;
  std::string id;
  std::string env_id;
  Metrics metrics;
  std::unique_ptr<Environment> env;
  std::vector<TreeNode> nodes;  // index == node id
  std::optional<std::int64_t> cursor;  // node the environment is at
  std::chrono::steady_clock::time_point last_used;
};

SessionManager::SessionManager(SessionConfig config) : config_(std::move(config)) {}
SessionManager::~SessionManager() = default;

std::size_t SessionManager::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void SessionManager::expire_idle() {
  const auto now = config_.now();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    bool idle = false;
    {
      std::unique_lock session_lock(it->second->mu, std::try_to_lock);
      // A session busy with a request is in use, not idle.
      idle = session_lock.owns_lock() && now - it->second->last_used > config_.idle_ttl;
    }
    if (idle) {
      expired_.insert(it->first);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mu_);
  expire_idle();
  const auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  if (expired_.count(id)) throw ApiError(410, "session-expired", "session " + id + " expired");
  throw ApiError(404, "session-not-found", "no session " + id);
}

json SessionManager::create(const json& request) {
  const std::string env_id = required_string(request, "env");
  const std::string benchmark = required_string(request, "benchmark");
  std::optional<std::string> reward;
  if (request.contains("reward_space")) reward = required_string(request, "reward_space");
  {
    std::lock_guard lock(mu_);
    expire_idle();
    if (sessions_.size() >= config_.max_sessions) {
      throw ApiError(429, "session-cap-exceeded",
                     "session limit of " + std::to_string(config_.max_sessions) + " reached");
    }
  }

  auto s = std::make_shared<Session>();
  s->id = new_session_id();
  s->env_id = env_id;
  json reply;
  try {
    s->metrics = metrics_for(env_id, reward);
    MakeOptions o = config_.make_options;
    o.benchmark = benchmark;
    o.reward_space = s->metrics.reward;
    o.observation_space.reset();
    s->env = make(env_id, o);
    s->env->reset();
    const StepReply r = s->env->step({}, std::vector<std::string>{s->metrics.instcount}, std::vector<std::string>{});
    if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
    TreeNode root;
    root.instcount = static_cast<std::int64_t>(observation_scalar(r.observations.at(0)));
    root.digest = s->env->state_digest();
    s->nodes.push_back(root);
    s->cursor = 0;
    json observations = json::array();
    for (const auto& space : s->env->observation_spaces()) observations.push_back(space);
    reply = {{"session_id", s->id},
             {"env", env_id},
             {"benchmark", s->env->benchmark()},
             {"action_space", s->env->action_space()},
             {"observation_spaces", observations},
             {"root_node", root.to_json()}};
  } catch (const Error& e) {
    throw api_error(e);
  }

  s->last_used = config_.now();
  std::lock_guard lock(mu_);
  if (sessions_.size() >= config_.max_sessions) {
    throw ApiError(429, "session-cap-exceeded", "session limit of " + std::to_string(config_.max_sessions) + " reached");
  }
  sessions_[s->id] = std::move(s);
  return reply;
}

json SessionManager::step(const std::string& session_id, std::int64_t node_id, const json& request) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  s->last_used = config_.now();
  if (node_id < 0 || node_id >= static_cast<std::int64_t>(s->nodes.size())) {
    throw ApiError(404, "node-not-found", "no node " + std::to_string(node_id));
  }
  if (!request.is_object() || !request.contains("action")) {
    throw ApiError(400, "invalid-argument", "request needs an 'action'");
  }
  const TreeNode parent = s->nodes[static_cast<std::size_t>(node_id)];
  Environment& env = *s->env;
  try {
    const json& a = request.at("action");
    Action action = a.is_string() ? action_from_name(env.action_space(), a.get<std::string>()) : action_from_json(a);
    check_action(env.action_space(), action);
    const std::string name = action_name(env.action_space(), action);

    if (s->cursor != node_id || env.done()) {
      s->cursor.reset();
      env.reset();
      if (!parent.path.empty()) {
        std::vector<Action> replay;
        for (const auto& n : parent.path) replay.push_back(action_from_name(env.action_space(), n));
        const StepReply r = env.step(replay, std::vector<std::string>{}, std::vector<std::string>{});
        if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
      }
      if (env.state_digest() != parent.digest) {
        throw Error(ErrorCode::digest_mismatch, "replaying node " + std::to_string(node_id) + " reached another state");
      }
      s->cursor = node_id;
    }

    const StepReply r = env.step({action}, std::vector<std::string>{s->metrics.instcount},
                                 std::vector<std::string>{s->metrics.reward});
    if (r.info.count("error")) {
      s->cursor.reset();
      throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
    }
    TreeNode child;
    child.id = static_cast<std::int64_t>(s->nodes.size());
    child.parent = node_id;
    child.action = name;
    child.reward = r.rewards.at(0);
    child.cumulative_reward = parent.cumulative_reward + child.reward;
    child.instcount = static_cast<std::int64_t>(observation_scalar(r.observations.at(0)));
    child.digest = env.state_digest();
    child.path = parent.path;
    child.path.push_back(name);

    std::optional<std::int64_t> duplicate_of;
    for (const auto& n : s->nodes) {
      if (n.digest == child.digest) {
        duplicate_of = n.id;
        break;
      }
    }
    s->nodes.push_back(child);
    s->cursor = child.id;
    return {{"node", child.to_json()},
            {"duplicate", duplicate_of.has_value()},
            {"duplicate_of", duplicate_of ? json(*duplicate_of) : json(nullptr)}};
  } catch (const Error& e) {
    throw api_error(e);
  } catch (const json::exception& e) {
    throw ApiError(400, "invalid-argument", e.what());
  }
}

json SessionManager::tree(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  s->last_used = config_.now();
  json nodes = json::object();
  for (const auto& n : s->nodes) nodes[std::to_string(n.id)] = n.to_json();
  return {{"session_id", s->id}, {"root", 0}, {"nodes", nodes}};
}

json SessionManager::series(const std::string& session_id, std::int64_t node_id, const std::string& metric) {
  if (metric != "instcount" && metric != "cumulative_reward") {
    throw ApiError(400, "invalid-argument", "metric must be instcount or cumulative_reward");
  }
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  s->last_used = config_.now();
  if (node_id < 0 || node_id >= static_cast<std::int64_t>(s->nodes.size())) {
    throw ApiError(404, "node-not-found", "no node " + std::to_string(node_id));
  }
  std::vector<double> values;
  for (std::optional<std::int64_t> at = node_id; at; at = s->nodes[static_cast<std::size_t>(*at)].parent) {
    const TreeNode& n = s->nodes[static_cast<std::size_t>(*at)];
    values.push_back(metric == "instcount" ? static_cast<double>(n.instcount) : n.cumulative_reward);
  }
  std::reverse(values.begin(), values.end());
  return {{"metric", metric}, {"node", node_id}, {"values", values}};
}

void SessionManager::remove(const std::string& session_id) {
  auto s = find(session_id);
  std::lock_guard lock(mu_);
  sessions_.erase(session_id);
}

json SessionManager::list_datasets() {
  json out = json::array();
  for (const auto& d : datasets().list()) {
    out.push_back({{"name", d->name()},
                   {"description", d->description()},
                   {"origin", std::string(to_string(d->origin()))},
                   {"backend", d->backend()},
                   {"size", d->size()}});
  }
  return out;
}

}  // namespace optgym::rest
