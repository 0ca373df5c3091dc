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
#include <string>
#include <string_view>
#include <vector>

namespace optgym::tinyir {

enum class Opcode : std::uint8_t { constant, add, sub, mul, id, input, output };

/// One straight-line instruction. Registers are dense indices r0..rK assigned
/// in definition order; `output` defines nothing (dest == -1).
struct Instruction {
  Opcode op = Opcode::constant;
  int dest = -1;
  std::int64_t value = 0;  // constant value, or input index for `input`
  int lhs = -1;            // first operand; the source of `id` and `output`
  int rhs = -1;

  static Instruction constant(int dest, std::int64_t value) {
    return {Opcode::constant, dest, value, -1, -1};
  }
  static Instruction binop(Opcode op, int dest, int lhs, int rhs) { return {op, dest, 0, lhs, rhs}; }
  static Instruction copy(int dest, int src) { return {Opcode::id, dest, 0, src, -1}; }
  static Instruction input(int dest, std::int64_t index) {
    return {Opcode::input, dest, index, -1, -1};
  }
  static Instruction output(int src) { return {Opcode::output, -1, 0, src, -1}; }

  bool is_binop() const { return op == Opcode::add || op == Opcode::sub || op == Opcode::mul; }
  bool defines() const { return op != Opcode::output; }

  bool operator==(const Instruction&) const = default;
};

struct Program {
  int inputs_arity = 0;
  std::vector<Instruction> instructions;

  bool operator==(const Program&) const = default;
};

/// Canonical text: an `inputs N` header, then one instruction per line in the
/// form `rN = op args` (lowercase, operands separated by ", "), LF endings.
std::string to_text(const Program& program);

/// Parses IR text. Blank lines and `;` comments are ignored; register names
/// are renumbered densely in definition order. Throws Error(parse_error) on
/// syntax errors and Error(malformed_program) on invariant violations.
Program parse(std::string_view text);

/// Checks the structural invariants: dense registers defined before use,
/// input indices below the arity, at least one output.
void validate(const Program& program);

/// Renumbers registers densely in definition order.
Program renumber(const Program& program);

std::string_view opcode_name(Opcode op);

inline constexpr std::size_t kHistogramBins = 7;
using OpcodeHistogram = std::array<std::int64_t, kHistogramBins>;

std::int64_t inst_count(const Program& program);
/// Bins: const, add, sub, mul, id, input, output.
OpcodeHistogram opcode_histogram(const Program& program);
/// SHA-256 over the canonical text.
std::string state_digest(const Program& program);

}  // namespace optgym::tinyir
