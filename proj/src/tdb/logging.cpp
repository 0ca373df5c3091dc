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

#include "optgym/tdb/logging.hpp"

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"
#include "optgym/env/registry.hpp"

namespace optgym::tdb {

LoggingWrapper::LoggingWrapper(std::unique_ptr<Environment> inner, std::shared_ptr<TransitionStore> store)
    : EnvWrapper(std::move(inner)), store_(std::move(store)) {
  const std::string backend = env_spec(inner_->env_id()).backend;
  if (backend == "tinyir") {
    columns_ = {"InstCount", "OpcodeHistogram", "Ir"};
  } else if (backend == "gcc") {
    columns_ = {"obj_size", "choices", ""};
  } else {
    throw Error(ErrorCode::invalid_argument, "no transition columns for environment " + inner_->env_id());
  }
}

void LoggingWrapper::log(const std::vector<ObservationValue>& values) {
  ObservationsRow obs;
  obs.state_digest = inner_->state_digest();
  obs.instcount = static_cast<std::int64_t>(observation_scalar(values.at(0)));
  obs.opcode_histogram = std::get<std::vector<std::int64_t>>(values.at(1));
  if (columns_.ir.empty()) {
    std::string text;
    for (auto v : obs.opcode_histogram) text += std::to_string(v) + ",";
    obs.ir_text = sha256_hex(text);
  } else {
    obs.ir_text = std::get<std::string>(values.at(2));
  }
  StepsRow steps{inner_->benchmark(), join_actions(inner_->actions()), obs.state_digest};
  store_->enqueue(std::move(steps), std::move(obs));
}

std::optional<ObservationValue> LoggingWrapper::reset(const std::optional<std::string>& benchmark) {
  auto observation = inner_->reset(benchmark);
  std::vector<std::string> ids{columns_.instcount, columns_.histogram};
  if (!columns_.ir.empty()) ids.push_back(columns_.ir);
  const StepReply r = inner_->step({}, ids, std::vector<std::string>{});
  if (!r.info.count("error")) log(r.observations);
  return observation;
}

StepReply LoggingWrapper::step(const std::vector<Action>& actions,
                               const std::optional<std::vector<std::string>>& observation_spaces,
                               const std::optional<std::vector<std::string>>& reward_spaces) {
  std::vector<std::string> requested;
  if (observation_spaces) {
    requested = *observation_spaces;
  } else if (const auto def = inner_->observation_space()) {
    requested.push_back(*def);
  }
  const std::size_t own = requested.size();
  std::vector<std::string> ids = requested;
  ids.push_back(columns_.instcount);
  ids.push_back(columns_.histogram);
  if (!columns_.ir.empty()) ids.push_back(columns_.ir);

  StepReply r = inner_->step(actions, ids, reward_spaces);
  if (r.info.count("error") || r.observations.size() != ids.size()) return r;
  log(std::vector<ObservationValue>(r.observations.begin() + static_cast<std::ptrdiff_t>(own), r.observations.end()));
  r.observations.resize(own);
  return r;
}

std::unique_ptr<Environment> LoggingWrapper::rewrap(std::unique_ptr<Environment> inner) const {
  return std::make_unique<LoggingWrapper>(std::move(inner), store_);
}

}  // namespace optgym::tdb
