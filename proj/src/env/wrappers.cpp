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

#include "optgym/env/wrappers.hpp"

#include <algorithm>
#include <set>

#include "optgym/common/error.hpp"
#include "optgym/datasets/uri.hpp"

namespace optgym {
namespace {

[[noreturn]] void bad_config(const std::string& detail) { throw Error(ErrorCode::invalid_wrapper_config, detail); }

}  // namespace

EnvWrapper::EnvWrapper(std::unique_ptr<Environment> inner) : inner_(std::move(inner)) {
  if (!inner_) bad_config("no environment to wrap");
}

// TimeLimit

TimeLimit::TimeLimit(std::unique_ptr<Environment> inner, std::optional<std::int64_t> max_steps)
    : EnvWrapper(std::move(inner)), max_steps_(max_steps) {
  if (max_steps_ && *max_steps_ < 1) bad_config("TimeLimit max_steps must be >= 1");
}

std::optional<ObservationValue> TimeLimit::reset(const std::optional<std::string>& benchmark) {
  auto obs = inner_->reset(benchmark);
  steps_ = 0;
  limit_reached_ = false;
  return obs;
}

StepReply TimeLimit::step(const std::vector<Action>& actions,
                          const std::optional<std::vector<std::string>>& observation_spaces,
                          const std::optional<std::vector<std::string>>& reward_spaces) {
  if (limit_reached_) throw Error(ErrorCode::episode_done, "time limit reached; reset() to continue");
  std::vector<Action> applied = actions;
  if (max_steps_) {
    const auto left = static_cast<std::size_t>(*max_steps_ - steps_);
    if (applied.size() > left) applied.resize(left);
  }
  StepReply reply = inner_->step(applied, observation_spaces, reward_spaces);
  steps_ += static_cast<std::int64_t>(applied.size());
  if (max_steps_ && steps_ >= *max_steps_) {
    limit_reached_ = true;
    if (!reply.done) reply.info["time_limit"] = "reached";
    reply.done = true;
  }
  return reply;
}

std::unique_ptr<Environment> TimeLimit::rewrap(std::unique_ptr<Environment> inner) const {
  auto copy = std::make_unique<TimeLimit>(std::move(inner), max_steps_);
  copy->steps_ = steps_;
  copy->limit_reached_ = limit_reached_;
  return copy;
}

// CycleOverBenchmarks

CycleOverBenchmarks::CycleOverBenchmarks(std::unique_ptr<Environment> inner, std::vector<std::string> benchmarks)
    : EnvWrapper(std::move(inner)), benchmarks_(std::move(benchmarks)) {
  if (benchmarks_.empty()) bad_config("CycleOverBenchmarks needs at least one benchmark");
  for (const auto& uri : benchmarks_) {
    try {
      BenchmarkUri::parse(uri);
    } catch (const Error& e) {
      bad_config("CycleOverBenchmarks: " + e.detail());
    }
  }
}

std::optional<ObservationValue> CycleOverBenchmarks::reset(const std::optional<std::string>& benchmark) {
  if (benchmark) return inner_->reset(benchmark);
  const std::string& next = benchmarks_[next_];
  next_ = (next_ + 1) % benchmarks_.size();
  return inner_->reset(next);
}

std::unique_ptr<Environment> CycleOverBenchmarks::rewrap(std::unique_ptr<Environment> inner) const {
  auto copy = std::make_unique<CycleOverBenchmarks>(std::move(inner), benchmarks_);
  copy->next_ = next_;
  return copy;
}

// ActionSubset

ActionSubset::ActionSubset(std::unique_ptr<Environment> inner, std::vector<std::int64_t> indices)
    : EnvWrapper(std::move(inner)), indices_(std::move(indices)) {
  const SpaceDescriptor& base = inner_->action_space();
  if (base.kind != SpaceKind::discrete) bad_config("ActionSubset needs a discrete action space");
  if (indices_.empty()) bad_config("ActionSubset needs at least one index");
  std::set<std::int64_t> seen;
  for (auto i : indices_) {
    if (i < 0 || i >= base.n) bad_config("ActionSubset index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) bad_config("ActionSubset index " + std::to_string(i) + " repeated");
  }
  space_.id = base.id;
  space_.display_name = base.display_name;
  space_.kind = SpaceKind::discrete;
  space_.n = static_cast<std::int64_t>(indices_.size());
  if (!base.names.empty()) {
    for (auto i : indices_) space_.names.push_back(base.names[static_cast<std::size_t>(i)]);
  }
}

StepReply ActionSubset::step(const std::vector<Action>& actions,
                             const std::optional<std::vector<std::string>>& observation_spaces,
                             const std::optional<std::vector<std::string>>& reward_spaces) {
  std::vector<Action> mapped;
  mapped.reserve(actions.size());
  for (const auto& a : actions) {
    check_action(space_, a);
    mapped.emplace_back(indices_[static_cast<std::size_t>(std::get<std::int64_t>(a))]);
  }
  return inner_->step(mapped, observation_spaces, reward_spaces);
}

std::unique_ptr<Environment> ActionSubset::rewrap(std::unique_ptr<Environment> inner) const {
  return std::make_unique<ActionSubset>(std::move(inner), indices_);
}

// DerivedObservation

DerivedObservation::DerivedObservation(std::unique_ptr<Environment> inner, std::string id, std::string function,
                                       std::optional<std::string> source, bool make_default)
    : EnvWrapper(std::move(inner)),
      id_(std::move(id)),
      function_(std::move(function)),
      source_(std::move(source)),
      make_default_(make_default) {
  spaces_ = inner_->observation_spaces();
  if (id_.empty()) bad_config("DerivedObservation needs an id");
  if (find_space(spaces_, id_)) bad_config("DerivedObservation id " + id_ + " already exists");
  const SpaceDescriptor& actions = inner_->action_space();
  if (actions.kind != SpaceKind::discrete) bad_config("DerivedObservation needs a discrete action space");
  std::int64_t length = actions.n;
  if (function_ == "action_histogram") {
    if (source_) bad_config("action_histogram takes no source");
  } else if (function_ == "append_action_histogram") {
    if (!source_) bad_config("append_action_histogram needs a source");
    const SpaceDescriptor* s = find_space(spaces_, *source_);
    if (s == nullptr || s->kind != SpaceKind::int64_vector) {
      bad_config("source " + *source_ + " is not an int64-vector observation space");
    }
    length += s->length;
  } else {
    bad_config("unknown DerivedObservation function " + function_);
  }
  spaces_.push_back(SpaceDescriptor::vector(id_, length));
}

std::optional<std::string> DerivedObservation::observation_space() const {
  if (make_default_) return id_;
  return inner_->observation_space();
}

std::vector<std::int64_t> DerivedObservation::histogram() const {
  const SpaceDescriptor& space = inner_->action_space();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(space.n), 0);
  for (const auto& name : inner_->actions()) {
    const Action a = action_from_name(space, name);
    ++counts[static_cast<std::size_t>(std::get<std::int64_t>(a))];
  }
  return counts;
}

ObservationValue DerivedObservation::derive(const std::optional<ObservationValue>& source) const {
  std::vector<std::int64_t> out;
  if (source) out = std::get<std::vector<std::int64_t>>(*source);
  const auto h = histogram();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::optional<ObservationValue> DerivedObservation::reset(const std::optional<std::string>& benchmark) {
  auto obs = inner_->reset(benchmark);
  if (!make_default_) return obs;
  if (!source_) return derive(std::nullopt);
  const StepReply r = inner_->step({}, std::vector<std::string>{*source_}, std::vector<std::string>{});
  if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
  return derive(r.observations.at(0));
}

StepReply DerivedObservation::step(const std::vector<Action>& actions,
                                   const std::optional<std::vector<std::string>>& observation_spaces,
                                   const std::optional<std::vector<std::string>>& reward_spaces) {
  std::vector<std::string> requested = observation_spaces.value_or(
      observation_space() ? std::vector<std::string>{*observation_space()} : std::vector<std::string>{});
  // Derived slots are filled here; their source is fetched in the same call.
  std::vector<std::string> forwarded;
  std::vector<std::ptrdiff_t> slot(requested.size(), -1);
  std::ptrdiff_t source_slot = -1;
  auto forward = [&](const std::string& id) {
    const auto it = std::find(forwarded.begin(), forwarded.end(), id);
    if (it != forwarded.end()) return it - forwarded.begin();
    forwarded.push_back(id);
    return static_cast<std::ptrdiff_t>(forwarded.size() - 1);
  };
  bool wants_derived = false;
  for (std::size_t i = 0; i < requested.size(); ++i) {
    if (requested[i] == id_) {
      wants_derived = true;
    } else {
      slot[i] = forward(requested[i]);
    }
  }
  if (wants_derived && source_) source_slot = forward(*source_);

  StepReply inner = inner_->step(actions, forwarded, reward_spaces);
  if (inner.info.count("error")) return inner;
  StepReply out = inner;
  out.observations.clear();
  std::optional<ObservationValue> derived;
  if (wants_derived) {
    derived = derive(source_slot >= 0 ? std::optional(inner.observations.at(static_cast<std::size_t>(source_slot)))
                                      : std::nullopt);
  }
  for (std::size_t i = 0; i < requested.size(); ++i) {
    out.observations.push_back(slot[i] >= 0 ? inner.observations.at(static_cast<std::size_t>(slot[i])) : *derived);
  }
  return out;
}

std::unique_ptr<Environment> DerivedObservation::rewrap(std::unique_ptr<Environment> inner) const {
  return std::make_unique<DerivedObservation>(std::move(inner), id_, function_, source_, make_default_);
}

// Factory

std::unique_ptr<Environment> wrap(std::unique_ptr<Environment> env, const json& config) {
  if (config.is_array()) {
    for (const auto& c : config) env = wrap(std::move(env), c);
    return env;
  }
  if (!config.is_object() || !config.contains("type") || !config["type"].is_string()) {
    bad_config("wrapper config must be an object with a string \"type\"");
  }
  const std::string type = config["type"];
  try {
    if (type == "TimeLimit") {
      const json& m = config.at("max_steps");
      return std::make_unique<TimeLimit>(std::move(env),
                                         m.is_null() ? std::nullopt : std::optional(m.get<std::int64_t>()));
    }
    if (type == "CycleOverBenchmarks") {
      return std::make_unique<CycleOverBenchmarks>(std::move(env),
                                                   config.at("benchmarks").get<std::vector<std::string>>());
    }
    if (type == "ActionSubset") {
      return std::make_unique<ActionSubset>(std::move(env), config.at("indices").get<std::vector<std::int64_t>>());
    }
    if (type == "DerivedObservation") {
      std::optional<std::string> source;
      if (config.contains("source") && !config["source"].is_null()) source = config["source"].get<std::string>();
      return std::make_unique<DerivedObservation>(std::move(env), config.at("id").get<std::string>(),
                                                  config.at("function").get<std::string>(), source,
                                                  config.value("default", false));
    }
  } catch (const json::exception& e) {
    bad_config(type + ": " + e.what());
  }
  bad_config("unknown wrapper type " + type);
}

}  // namespace optgym
