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

#include "optgym/common/error.hpp"

#include <array>
#include <utility>

namespace optgym {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 34> kNames{{
    {ErrorCode::unknown_environment, "unknown-environment"},
    {ErrorCode::unknown_space, "unknown-space"},
    {ErrorCode::unknown_benchmark, "unknown-benchmark"},
    {ErrorCode::unknown_dataset, "unknown-dataset"},
    {ErrorCode::unknown_pass, "unknown-pass"},
    {ErrorCode::backend_unavailable, "backend-unavailable"},
    {ErrorCode::backend_crash, "backend-crash"},
    {ErrorCode::session_not_found, "session-not-found"},
    {ErrorCode::session_expired, "session-expired"},
    {ErrorCode::session_cap_exceeded, "session-cap-exceeded"},
    {ErrorCode::resource_exhausted, "resource-exhausted"},
    {ErrorCode::timeout, "timeout"},
    {ErrorCode::start_timeout, "start-timeout"},
    {ErrorCode::spawn_failure, "spawn-failure"},
    {ErrorCode::out_of_range_action, "out-of-range-action"},
    {ErrorCode::episode_done, "episode-done"},
    {ErrorCode::digest_mismatch, "digest-mismatch"},
    {ErrorCode::invalid_wrapper_config, "invalid-wrapper-config"},
    {ErrorCode::malformed_program, "malformed-program"},
    {ErrorCode::parse_error, "parse-error"},
    {ErrorCode::compiler_not_found, "compiler-not-found"},
    {ErrorCode::help_parse_empty, "help-parse-empty"},
    {ErrorCode::compile_timeout, "compile-timeout"},
    {ErrorCode::compile_error, "compile-error"},
    {ErrorCode::empty_directory, "empty-directory"},
    {ErrorCode::unreadable_file, "unreadable-file"},
    {ErrorCode::checksum_mismatch, "checksum-mismatch"},
    {ErrorCode::network_failure, "network-failure"},
    {ErrorCode::budget_invalid, "budget-invalid"},
    {ErrorCode::fork_unavailable, "fork-unavailable"},
    {ErrorCode::io_failure, "io-failure"},
    {ErrorCode::store_unwritable, "store-unwritable"},
    {ErrorCode::protocol_error, "protocol-error"},
    {ErrorCode::invalid_argument, "invalid-argument"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::protocol_error;
}

}  // namespace optgym
