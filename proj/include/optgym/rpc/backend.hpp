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

#include "optgym/rpc/spaces.hpp"

namespace optgym::rpc {

/// A parsed, immutable benchmark. The service caches these and hands the same
/// instance to every session started on the benchmark.
struct LoadedBenchmark {
  virtual ~LoadedBenchmark() = default;
  std::string uri;
  std::string content_digest;
};

struct ActionOutcome {
  bool end_of_episode = false;
  bool action_space_changed = false;
  std::optional<SpaceDescriptor> new_action_space;
};

/// The per-compiler state machine. The runtime guarantees that calls on one
/// session are never concurrent and that init() precedes everything else.
class CompilationSession {
 public:
  virtual ~CompilationSession() = default;

  virtual void init(const SpaceDescriptor& action_space,
                    std::shared_ptr<const LoadedBenchmark> benchmark) = 0;
  virtual ActionOutcome apply_action(const Action& action) = 0;
  virtual ObservationValue set_observation(const SpaceDescriptor& space) = 0;
  /// Deep copy of the current state, without replaying any history.
  virtual std::unique_ptr<CompilationSession> fork() const = 0;
};

class CompilationBackend {
 public:
  virtual ~CompilationBackend() = default;

  virtual std::vector<SpaceDescriptor> action_spaces() const = 0;
  virtual std::vector<SpaceDescriptor> observation_spaces() const = 0;

  /// Digest used in the benchmark cache key. The default hashes `content`
  /// and rejects content-less URIs with Error(unknown_benchmark); backends
  /// that can materialize some URIs themselves override this.
  virtual std::string content_digest(const std::string& uri,
                                     const std::optional<std::string>& content) const;

  /// The expensive, cacheable part of starting a session.
  virtual std::shared_ptr<const LoadedBenchmark> load_benchmark(
      const std::string& uri, const std::optional<std::string>& content) = 0;

  virtual std::unique_ptr<CompilationSession> create_session() = 0;
};

}  // namespace optgym::rpc
