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

#include "optgym/tinyir/ir.hpp"

namespace optgym::tinyir {

/// Deterministic seeded program generator.
///
/// Algorithm (kept stable because benchmark digests depend on it):
///  1. rng = Rng(seed) (xoshiro256** seeded through splitmix64).
///  2. size = 20 + rng.below(181); arity = rng.below(5); outputs = 1 + rng.below(3).
///  3. dead fraction f = 0.4 * uniform01(); opcode weights for
///     {const, add, sub, mul, id, input} each 1 + below(8); reuse probability
///     for repeated binops = 0.25 * uniform01().
///  4. The body (size - outputs instructions) is emitted left to right. Each
///     instruction is dead with probability f: dead instructions may read any
///     register, live instructions only read live ones. A binop repeats an
///     earlier live binop verbatim with the reuse probability. Otherwise a
///     dead operand is uniform over all registers; a live operand is, with
///     probability 7/8, taken (uniformly, without replacement) from the live
///     registers nobody has read yet, else uniform over live registers.
///     Constants are 2 with probability 1/4, else uniform in [-8, 16].
///  5. Each output reads the most recent live register with probability 1/2,
///     else a live operand drawn as in step 4.
Program generate(std::uint32_t seed);

}  // namespace optgym::tinyir
