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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace optgym {

/// Serialization and replay unit: replaying `actions` from a reset on
/// `benchmark` must reproduce `state_digest`.
struct EnvState {
  std::string env_id;
  std::string benchmark;
  std::string reward_space_id;  // empty when the environment had no default reward
  std::vector<std::string> actions;
  double cumulative_reward = 0;
  std::string state_digest;  // 64 lowercase hex chars

  /// Exactly {"version":1, env_id, benchmark, reward_space_id, actions,
  /// cumulative_reward, state_digest}.
  nlohmann::json to_json() const;
  /// Throws Error(invalid_argument) on missing/extra keys or a bad version.
  static EnvState from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static EnvState load(const std::filesystem::path& path);

  bool operator==(const EnvState&) const = default;
};

}  // namespace optgym
