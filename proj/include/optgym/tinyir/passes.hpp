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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "optgym/tinyir/ir.hpp"

namespace optgym::tinyir {

/// The pass catalog, in action-index order.
enum class Pass : std::uint8_t { constfold, dce, cse, copyprop, canonicalize, strength_reduce };

inline constexpr std::array<Pass, 6> kPassCatalog{Pass::constfold,    Pass::dce,
                                                  Pass::cse,          Pass::copyprop,
                                                  Pass::canonicalize, Pass::strength_reduce};

std::string_view pass_name(Pass pass);
/// Throws Error(unknown_pass).
Pass pass_from_name(std::string_view name);

/// Each pass is pure, terminating, semantics-preserving, and idempotent.
///  - constfold: a binop whose operands are both const-defined becomes a const.
///  - dce: drops instructions not transitively feeding an output (renumbers).
///  - cse: a binop identical in (op, lhs, rhs) to an earlier one becomes `id`
///    of the earlier destination.
///  - copyprop: uses of id-defined registers are rewritten to the id's root
///    source; the id itself stays for dce.
///  - canonicalize: commutative operands (add, mul) ordered by register index.
///  - strength-reduce: mul by const 2 becomes add of the other operand to itself.
Program run_pass(const Program& program, Pass pass);

Program constant_fold(const Program& program);
Program dead_code_elimination(const Program& program);
Program common_subexpression_elimination(const Program& program);
Program copy_propagation(const Program& program);
Program canonicalize(const Program& program);
Program strength_reduce(const Program& program);

/// Instruction count reached by the default pipeline
/// [canonicalize, constfold, cse, copyprop, dce] iterated to a fixpoint
/// (at most 100 rounds). This is the stand-in for the -Oz reference.
std::int64_t baseline_cost(const Program& program);
Program baseline_pipeline(const Program& program);

}  // namespace optgym::tinyir
