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

#include "optgym/rpc/wire.hpp"

#include <array>
#include <utility>

namespace optgym::rpc {
namespace {

constexpr std::array<std::pair<RequestKind, std::string_view>, 7> kKinds{{
    {RequestKind::get_spaces, "GetSpaces"},
    {RequestKind::start_session, "StartSession"},
    {RequestKind::step, "Step"},
    {RequestKind::fork, "Fork"},
    {RequestKind::end_session, "EndSession"},
    {RequestKind::get_stats, "GetStats"},
    {RequestKind::clear_cache, "ClearCache"},
}};

}  // namespace

std::string_view to_string(RequestKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

RequestKind request_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::protocol_error, "unknown request kind " + std::string(name));
}

json make_request(RequestKind kind) { return json{{"kind", to_string(kind)}}; }

json make_reply(const json& request) {
  return json{{"id", request.at("id")}, {"kind", request.at("kind").get<std::string>() + "Reply"}};
}

json make_error_reply(std::uint64_t id, ErrorCode code, const std::string& detail) {
  return json{{"id", id}, {"kind", "Error"}, {"code", to_string(code)}, {"detail", detail}};
}

const json& check_reply(const json& reply) {
  if (reply.value("kind", "") == "Error") {
    throw Error(error_code_from_string(reply.value("code", "protocol-error")),
                reply.value("detail", ""));
  }
  return reply;
}

json step_request(std::uint64_t session_id, const std::vector<Action>& actions,
                  const std::vector<std::string>& observation_spaces) {
  json j = make_request(RequestKind::step);
  j["session_id"] = session_id;
  j["actions"] = json::array();
  for (const auto& a : actions) j["actions"].push_back(action_to_json(a));
  j["observation_spaces"] = observation_spaces;
  return j;
}

StepResult parse_step_reply(const json& reply) {
  check_reply(reply);
  StepResult r;
  for (const auto& o : reply.at("observations")) r.observations.push_back(observation_from_json(o));
  r.end_of_episode = reply.value("end_of_episode", false);
  r.action_space_changed = reply.value("action_space_changed", false);
  if (reply.contains("action_space")) r.action_space = reply.at("action_space").get<SpaceDescriptor>();
  return r;
}

void to_json(json& j, const ServiceStats& s) {
  j = json{{"cache_hits", s.cache_hits},           {"cache_misses", s.cache_misses},
           {"benchmark_loads", s.benchmark_loads}, {"cache_size", s.cache_size},
           {"live_sessions", s.live_sessions},     {"sessions_started", s.sessions_started},
           {"timeouts", s.timeouts}};
}

void from_json(const json& j, ServiceStats& s) {
  s.cache_hits = j.value("cache_hits", std::int64_t{0});
  s.cache_misses = j.value("cache_misses", std::int64_t{0});
  s.benchmark_loads = j.value("benchmark_loads", std::int64_t{0});
  s.cache_size = j.value("cache_size", std::int64_t{0});
  s.live_sessions = j.value("live_sessions", std::int64_t{0});
  s.sessions_started = j.value("sessions_started", std::int64_t{0});
  s.timeouts = j.value("timeouts", std::int64_t{0});
}

}  // namespace optgym::rpc
