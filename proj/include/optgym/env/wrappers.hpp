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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optgym/env/env.hpp"

namespace optgym {

/// Forwards every call to the wrapped environment. Subclasses override the
/// parts of the MDP they change.
class EnvWrapper : public Environment {
 public:
  explicit EnvWrapper(std::unique_ptr<Environment> inner);

  const std::string& env_id() const override { return inner_->env_id(); }
  const SpaceDescriptor& action_space() const override { return inner_->action_space(); }
  const std::vector<SpaceDescriptor>& observation_spaces() const override { return inner_->observation_spaces(); }
  const std::vector<SpaceDescriptor>& reward_spaces() const override { return inner_->reward_spaces(); }
  std::optional<std::string> observation_space() const override { return inner_->observation_space(); }
  std::optional<std::string> reward_space() const override { return inner_->reward_space(); }

  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark = std::nullopt) override {
    return inner_->reset(benchmark);
  }
  using Environment::step;
  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                 const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) override {
    return inner_->step(actions, observation_spaces, reward_spaces);
  }
  std::unique_ptr<Environment> fork() override { return rewrap(inner_->fork()); }

  EnvState state() const override { return inner_->state(); }
  std::string benchmark() const override { return inner_->benchmark(); }
  double cumulative_reward() const override { return inner_->cumulative_reward(); }
  const std::string& state_digest() const override { return inner_->state_digest(); }
  const std::vector<std::string>& actions() const override { return inner_->actions(); }
  std::int64_t episode() const override { return inner_->episode(); }
  bool done() const override { return inner_->done(); }
  rpc::Service& service() override { return inner_->service(); }

  Environment& inner() { return *inner_; }

 protected:
  /// A copy of this wrapper (with its current bookkeeping) around `inner`.
  virtual std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const = 0;

  std::unique_ptr<Environment> inner_;
};

/// Ends the episode once `max_steps` actions have been applied. A batch that
/// crosses the limit is cut at the limit. std::nullopt means no limit.
class TimeLimit final : public EnvWrapper {
 public:
  TimeLimit(std::unique_ptr<Environment> inner, std::optional<std::int64_t> max_steps);

  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark = std::nullopt) override;
  using EnvWrapper::step;
  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                 const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) override;
  bool done() const override { return limit_reached_ || inner_->done(); }
  std::int64_t steps() const { return steps_; }

 protected:
  std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const override;

 private:
  std::optional<std::int64_t> max_steps_;
  std::int64_t steps_ = 0;
  bool limit_reached_ = false;
};

/// reset() without an explicit benchmark moves to the next benchmark of the
/// list, wrapping around.
class CycleOverBenchmarks final : public EnvWrapper {
 public:
  CycleOverBenchmarks(std::unique_ptr<Environment> inner, std::vector<std::string> benchmarks);

  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark = std::nullopt) override;

 protected:
  std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const override;

 private:
  std::vector<std::string> benchmarks_;
  std::size_t next_ = 0;
};

/// Restricts a discrete action space to `indices`, renumbered 0..k-1 in the
/// given order.
class ActionSubset final : public EnvWrapper {
 public:
  ActionSubset(std::unique_ptr<Environment> inner, std::vector<std::int64_t> indices);

  const SpaceDescriptor& action_space() const override { return space_; }
  using EnvWrapper::step;
  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                 const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) override;

 protected:
  std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const override;

 private:
  std::vector<std::int64_t> indices_;
  SpaceDescriptor space_;
};

/// Adds an observation space computed on the client from the episode's
/// action history, optionally appended to an int64-vector source space.
///   action_histogram         per-action counts of the current episode
///   append_action_histogram  source vector followed by the counts
class DerivedObservation final : public EnvWrapper {
 public:
  DerivedObservation(std::unique_ptr<Environment> inner, std::string id, std::string function,
                     std::optional<std::string> source, bool make_default);

  const std::vector<SpaceDescriptor>& observation_spaces() const override { return spaces_; }
  std::optional<std::string> observation_space() const override;
  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark = std::nullopt) override;
  using EnvWrapper::step;
  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                 const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) override;

 protected:
  std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const override;

 private:
  std::vector<std::int64_t> histogram() const;
  ObservationValue derive(const std::optional<ObservationValue>& source) const;

  std::string id_;
  std::string function_;
  std::optional<std::string> source_;
  bool make_default_;
  std::vector<SpaceDescriptor> spaces_;
};

/// Applies wrappers described as JSON, either one object or an array applied
/// in order. Each object has a "type" of TimeLimit {max_steps: int or null},
/// CycleOverBenchmarks {benchmarks: [uri]}, ActionSubset {indices: [int]} or
/// DerivedObservation {id, function, source?, default?}.
/// Throws Error(invalid_wrapper_config).
std::unique_ptr<Environment> wrap(std::unique_ptr<Environment> env, const json& config);

}  // namespace optgym
