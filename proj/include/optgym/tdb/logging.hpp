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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optgym/env/wrappers.hpp"
#include "optgym/tdb/store.hpp"

namespace optgym::tdb {

/// Queues a Steps row and an Observations row for every state an episode
/// reaches: the reset state and the state after each step() call. A batched
/// step is logged as one row for its final state.
class LoggingWrapper final : public EnvWrapper {
 public:
  /// Throws Error(invalid_argument) for environments without a column mapping.
  LoggingWrapper(std::unique_ptr<Environment> inner, std::shared_ptr<TransitionStore> store);

  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark = std::nullopt) override;
  using EnvWrapper::step;
  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces = std::nullopt,
                 const std::optional<std::vector<std::string>>& reward_spaces = std::nullopt) override;

  /// Returns once every row queued so far is visible to readers.
  void flush() { store_->flush(); }
  TransitionStore& store() { return *store_; }

 protected:
  std::unique_ptr<Environment> rewrap(std::unique_ptr<Environment> inner) const override;

 private:
  struct Columns {
    std::string instcount;  // scalar observation
    std::string histogram;  // int64-vector observation
    std::string ir;         // text observation; empty: digest of the histogram
  };
  void log(const std::vector<ObservationValue>& values);

  std::shared_ptr<TransitionStore> store_;
  Columns columns_;
};

}  // namespace optgym::tdb
