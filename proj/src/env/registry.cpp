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

#include "optgym/env/registry.hpp"

#include <map>
#include <mutex>

#include "optgym/common/error.hpp"

namespace optgym {
namespace {

std::map<std::string, EnvSpec> builtin() {
  std::map<std::string, EnvSpec> specs;
  specs["tinyir-v0"] = EnvSpec{
      .id = "tinyir-v0",
      .backend = "tinyir",
      .default_action_space = "passes",
      .default_benchmark = "benchmark://tinyir-gen-v0/seed-0",
      .digest_space = "Digest",
      .rewards = {{"InstructionCount", "InstCount", "", RewardScale::none},
                  {"InstructionCountOz", "InstCount", "BaselineCost", RewardScale::baseline_gain}},
  };
  specs["gcc-v0"] = EnvSpec{
      .id = "gcc-v0",
      .backend = "gcc",
      .default_action_space = "categorical",
      .default_benchmark = "benchmark://csuite-v0/crc32",
      .digest_space = "Digest",
      .rewards = {{"asm_size", "asm_size", "", RewardScale::none, true, true},
                  {"obj_size", "obj_size", "", RewardScale::none, true, true},
                  {"obj_size_os", "obj_size", "obj_size_os", RewardScale::baseline_value, true, true}},
  };
  return specs;
}

std::mutex& registry_mu() {
  static std::mutex mu;
  return mu;
}

std::map<std::string, EnvSpec>& registry() {
  static std::map<std::string, EnvSpec> specs = builtin();
  return specs;
}

}  // namespace

const EnvSpec& env_spec(const std::string& id) {
  std::lock_guard lock(registry_mu());
  const auto it = registry().find(id);
  if (it == registry().end()) throw Error(ErrorCode::unknown_environment, id);
  return it->second;
}

std::vector<std::string> registered_envs() {
  std::lock_guard lock(registry_mu());
  std::vector<std::string> ids;
  for (const auto& [id, spec] : registry()) ids.push_back(id);
  return ids;
}

void register_env(EnvSpec spec) {
  std::lock_guard lock(registry_mu());
  registry()[spec.id] = std::move(spec);
}

}  // namespace optgym
