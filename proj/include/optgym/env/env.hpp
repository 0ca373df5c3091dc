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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optgym/datasets/datasets.hpp"
#include "optgym/env/env_state.hpp"
#include "optgym/env/registry.hpp"
#include "optgym/rpc/service.hpp"
#include "optgym/rpc/spaces.hpp"

namespace optgym {

struct StepReply {
  std::vector<ObservationValue> observations;  // one per requested observation space
  std::vector<double> rewards;                 // one per requested reward space
  bool done = false;
  bool action_space_changed = false;
  /// On a backend failure the episode ends with info["error"] set to the
  /// error code; observations and rewards are then empty.
  std::map<std::string, std::string> info;
};

/// An MDP over one compiler. One handle is single-owner; distinct handles
/// (forks included) may be driven from different threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& env_id() const = 0;
  virtual const SpaceDescriptor& action_space() const = 0;
  virtual const std::vector<SpaceDescriptor>& observation_spaces() const = 0;
  virtual const std::vector<SpaceDescriptor>& reward_spaces() const = 0;
  /// Defaults used when step() is not given explicit space lists.
  virtual std::optional<std::string> observation_space() const = 0;
  virtual std::optional<std::string> reward_space() const = 0;

  /// Starts a new episode, on `benchmark` when given. Returns the default
  /// observation, if there is one.
  virtual std::optional<ObservationValue> reset(
      const std::optional<std::string>& benchmark = std::nullopt) = 0;

  /// Applies `actions` in order in one backend round trip and reports the
  /// final state. Absent space lists mean "the defaults"; an empty action
  /// list only observes. Throws Error(episode_done) after done and
  /// Error(out_of_range_action) for invalid actions.
  virtual StepReply step(const std::vector<Action>& actions,
                         const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                         const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) = 0;
  StepReply step(const Action& action) { return step(std::vector<Action>{action}); }

  /// Independent deep copy of the current state (backend-side, no replay).
  virtual std::unique_ptr<Environment> fork() = 0;

  virtual EnvState state() const = 0;
  virtual std::string benchmark() const = 0;
  virtual double cumulative_reward() const = 0;
  virtual const std::string& state_digest() const = 0;
  virtual const std::vector<std::string>& actions() const = 0;
  virtual std::int64_t episode() const = 0;
  virtual bool done() const = 0;

  /// The backing service (for instrumentation).
  virtual rpc::Service& service() = 0;
};

struct MakeOptions {
  std::optional<std::string> benchmark;          // default: the environment's default benchmark
  std::optional<std::string> observation_space;  // absent: no default observation
  std::optional<std::string> reward_space;       // absent: no default reward
  std::optional<std::string> action_space;       // absent: the environment's default
  std::optional<std::string> compiler;           // gcc-v0: compiler specifier
  rpc::ServiceConfig service;
  std::string endpoint;  // host:port of a running service instead of a child process
};

/// Throws Error(unknown_environment), Error(unknown_space) or
/// Error(backend_unavailable).
std::unique_ptr<Environment> make(const std::string& env_id, const MakeOptions& options = {});

/// Rebuilds an environment from a saved state by replaying its actions in one
/// batched step; throws Error(digest_mismatch) if the replay does not land on
/// the recorded digest.
std::unique_ptr<Environment> restore_state(const EnvState& state, MakeOptions options = {});

}  // namespace optgym
