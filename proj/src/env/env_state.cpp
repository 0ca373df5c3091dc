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

#include "optgym/env/env_state.hpp"

#include <set>

#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"

namespace optgym {

nlohmann::json EnvState::to_json() const {
  return {{"version", 1},
          {"env_id", env_id},
          {"benchmark", benchmark},
          {"reward_space_id", reward_space_id},
          {"actions", actions},
          {"cumulative_reward", cumulative_reward},
          {"state_digest", state_digest}};
}

EnvState EnvState::from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys{"version", "env_id", "benchmark", "reward_space_id",
                                           "actions", "cumulative_reward", "state_digest"};
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "state must be a JSON object");
  std::set<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.insert(k);
  if (keys != kKeys) throw Error(ErrorCode::invalid_argument, "state keys differ from the schema");
  if (j.at("version") != 1) throw Error(ErrorCode::invalid_argument, "unsupported state version");
  try {
    EnvState s;
    s.env_id = j.at("env_id").get<std::string>();
    s.benchmark = j.at("benchmark").get<std::string>();
    s.reward_space_id = j.at("reward_space_id").get<std::string>();
    s.actions = j.at("actions").get<std::vector<std::string>>();
    s.cumulative_reward = j.at("cumulative_reward").get<double>();
    s.state_digest = j.at("state_digest").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, e.what());
  }
}

void EnvState::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

EnvState EnvState::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
}

}  // namespace optgym
