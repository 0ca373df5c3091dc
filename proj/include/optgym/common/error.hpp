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

#include <stdexcept>
#include <string>
#include <string_view>

namespace optgym {

/// Machine-readable failure categories shared by every layer of the framework.
/// The string form (see to_string) is what crosses the wire and what the REST
/// API reports in its `code` field.
enum class ErrorCode {
  unknown_environment,
  unknown_space,
  unknown_benchmark,
  unknown_dataset,
  unknown_pass,
  backend_unavailable,
  backend_crash,
  session_not_found,
  session_expired,
  session_cap_exceeded,
  resource_exhausted,
  timeout,
  start_timeout,
  spawn_failure,
  out_of_range_action,
  episode_done,
  digest_mismatch,
  invalid_wrapper_config,
  malformed_program,
  parse_error,
  compiler_not_found,
  help_parse_empty,
  compile_timeout,
  compile_error,
  empty_directory,
  unreadable_file,
  checksum_mismatch,
  network_failure,
  budget_invalid,
  fork_unavailable,
  io_failure,
  store_unwritable,
  protocol_error,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);
ErrorCode error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace optgym
