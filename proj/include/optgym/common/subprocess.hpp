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

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optgym {

struct RunOptions {
  std::optional<std::filesystem::path> cwd;
  std::optional<std::chrono::milliseconds> timeout;
};

struct RunResult {
  int exit_code = -1;  // -1 when killed by a signal or on timeout
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs `argv` to completion, capturing stdout and stderr. argv[0] is looked up
/// on PATH. Throws Error(spawn_failure) when the program cannot be started.
RunResult run_process(const std::vector<std::string>& argv, const RunOptions& options = {});

/// A long-lived child whose stdout is readable line by line; stdin is
/// /dev/null and stderr is inherited. The child is killed (SIGKILL) and
/// reaped on destruction.
class ChildProcess {
 public:
  static ChildProcess spawn(const std::vector<std::string>& argv);

  ChildProcess() = default;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess();

  pid_t pid() const { return pid_; }

  /// Reads one '\n'-terminated line from the child's stdout. Returns nullopt on
  /// EOF or when the deadline passes first.
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);

  bool running();
  void kill();

 private:
  void reset() noexcept;

  pid_t pid_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
};

}  // namespace optgym
