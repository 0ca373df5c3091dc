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
#include <span>
#include <vector>

#include "optgym/tinyir/ir.hpp"

namespace optgym::tinyir {

/// Reference semantics: two's-complement wrapping 64-bit arithmetic, outputs
/// in `output` order. Throws Error(malformed_program) on use-before-def and
/// Error(invalid_argument) when |inputs| != inputs_arity.
std::vector<std::int64_t> interpret(const Program& program, std::span<const std::int64_t> inputs);

}  // namespace optgym::tinyir
