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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <variant>
#include <vector>

#include "optgym/common/error.hpp"
#include "optgym/gcc/spec.hpp"

namespace optgym::gcc {

enum class SizeTarget { asm_size, obj_size };

struct MeasureStats {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t invocations = 0;  // compiler processes started
};

/// Compiles sources and reports output sizes in bytes. Results (failures
/// included) are cached by (flags, source digest, target). Safe for
/// concurrent use; at most `jobs` compilers run at once.
class Measurer {
 public:
  Measurer(std::string compiler, int jobs = 0, std::chrono::seconds timeout = std::chrono::seconds(60));

  /// Throws Error(compile_error) or Error(compile_timeout).
  std::int64_t measure(const std::vector<std::string>& flags, const std::string& source,
                       const std::string& source_digest, SizeTarget target);

  /// The argv used for one compilation, with `dir` as scratch directory.
  std::vector<std::string> command(const std::vector<std::string>& flags, const std::filesystem::path& dir,
                                   SizeTarget target) const;

  MeasureStats stats() const;
  const std::string& compiler() const { return compiler_; }

 private:
  using Result = std::variant<std::int64_t, Error>;
  Result compile(const std::vector<std::string>& flags, const std::string& source, SizeTarget target);

  std::string compiler_;
  std::chrono::seconds timeout_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  mutable std::mutex mu_;
  std::map<std::string, Result> cache_;
  MeasureStats stats_;
};

}  // namespace optgym::gcc
