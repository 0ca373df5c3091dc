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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optgym/common/error.hpp"
#include "optgym/rpc/spaces.hpp"

namespace optgym::rpc {

/// Request kinds. The admin kinds (GetStats, ClearCache) exist for tests and
/// operators; clients never need them to drive an episode.
enum class RequestKind { get_spaces, start_session, step, fork, end_session, get_stats, clear_cache };

std::string_view to_string(RequestKind kind);
RequestKind request_kind_from_string(std::string_view name);

/// Message shapes (all JSON objects, `id` is echoed in the reply):
///   {"id", "kind":"GetSpaces"}
///       -> {"id", "kind":"GetSpacesReply", "action_spaces":[..], "observation_spaces":[..]}
///   {"id", "kind":"StartSession", "benchmark", "action_space", "content"?,
///    "observation_spaces"?}
///       -> {"id", "kind":"StartSessionReply", "session_id", "observations"}
///   {"id", "kind":"Step", "session_id", "actions":[..], "observation_spaces":[..]}
///       -> {"id", "kind":"StepReply", "observations":[..], "end_of_episode",
///           "action_space_changed", "action_space"?}
///   {"id", "kind":"Fork", "session_id"} -> {"id", "kind":"ForkReply", "session_id"}
///   {"id", "kind":"EndSession", "session_id"} -> {"id", "kind":"EndSessionReply"}
///   {"id", "kind":"GetStats"} -> {"id", "kind":"GetStatsReply", "stats":{..}}
///   {"id", "kind":"ClearCache"} -> {"id", "kind":"ClearCacheReply"}
/// Any request may instead be answered with
///   {"id", "kind":"Error", "code":"<error-code>", "detail"}.
json make_request(RequestKind kind);
json make_reply(const json& request);
json make_error_reply(std::uint64_t id, ErrorCode code, const std::string& detail);

/// Throws the Error carried by an Error reply; otherwise returns `reply`.
const json& check_reply(const json& reply);

struct StepResult {
  std::vector<ObservationValue> observations;
  bool end_of_episode = false;
  bool action_space_changed = false;
  std::optional<SpaceDescriptor> action_space;
};

json step_request(std::uint64_t session_id, const std::vector<Action>& actions,
                  const std::vector<std::string>& observation_spaces);
StepResult parse_step_reply(const json& reply);

struct ServiceStats {
  std::int64_t cache_hits = 0;
  std::int64_t cache_misses = 0;
  std::int64_t benchmark_loads = 0;  // parse work actually performed
  std::int64_t cache_size = 0;
  std::int64_t live_sessions = 0;
  std::int64_t sessions_started = 0;
  std::int64_t timeouts = 0;
};

void to_json(json& j, const ServiceStats& s);
void from_json(const json& j, ServiceStats& s);

}  // namespace optgym::rpc
