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

#include <optional>
#include <string>
#include <vector>

namespace optgym {

enum class RewardScale {
  none,           // prev - cur
  baseline_gain,  // (prev - cur) / (initial - baseline); raw when the denominator is 0
  baseline_value  // (prev - cur) / baseline; raw when baseline is 0
};

/// A reward space: the per-step decrease of a scalar observation, optionally
/// scaled by a reference observation captured at reset.
struct RewardSpec {
  std::string id;
  std::string metric;    // observation space id
  std::string baseline;  // observation space id, empty for RewardScale::none
  RewardScale scale = RewardScale::none;
  bool deterministic = true;
  bool platform_dependent = false;
};

struct EnvSpec {
  std::string id;
  std::string backend;  // service name: optgym-<backend>-service
  std::string default_action_space;
  std::string default_benchmark;
  std::string digest_space;  // observation holding the state digest
  std::vector<RewardSpec> rewards;
};

/// "tinyir-v0" and "gcc-v0" are registered on first use.
const EnvSpec& env_spec(const std::string& id);
std::vector<std::string> registered_envs();
void register_env(EnvSpec spec);

}  // namespace optgym
