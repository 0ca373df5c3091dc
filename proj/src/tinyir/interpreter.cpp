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

#include "optgym/tinyir/interpreter.hpp"

#include <string>

#include "optgym/common/error.hpp"

namespace optgym::tinyir {

std::vector<std::int64_t> interpret(const Program& program, std::span<const std::int64_t> inputs) {
  if (inputs.size() != static_cast<std::size_t>(program.inputs_arity)) {
    throw Error(ErrorCode::invalid_argument, "expected " + std::to_string(program.inputs_arity) +
                                                 " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<std::uint64_t> regs;
  regs.reserve(program.instructions.size());
  std::vector<std::int64_t> outputs;
  auto read = [&](int r) {
    if (r < 0 || static_cast<std::size_t>(r) >= regs.size()) {
      throw Error(ErrorCode::malformed_program, "use of undefined register r" + std::to_string(r));
    }
    return regs[static_cast<std::size_t>(r)];
  };
  for (const auto& inst : program.instructions) {
    std::uint64_t value = 0;
    switch (inst.op) {
      case Opcode::constant:
        value = static_cast<std::uint64_t>(inst.value);
        break;
      case Opcode::add:
        value = read(inst.lhs) + read(inst.rhs);
        break;
      case Opcode::sub:
        value = read(inst.lhs) - read(inst.rhs);
        break;
      case Opcode::mul:
        value = read(inst.lhs) * read(inst.rhs);
        break;
      case Opcode::id:
        value = read(inst.lhs);
        break;
      case Opcode::input:
        if (inst.value < 0 || inst.value >= program.inputs_arity) {
          throw Error(ErrorCode::malformed_program, "input index out of range");
        }
        value = static_cast<std::uint64_t>(inputs[static_cast<std::size_t>(inst.value)]);
        break;
      case Opcode::output:
        outputs.push_back(static_cast<std::int64_t>(read(inst.lhs)));
        continue;
    }
    if (inst.dest != static_cast<int>(regs.size())) {
      throw Error(ErrorCode::malformed_program, "registers not dense");
    }
    regs.push_back(value);
  }
  return outputs;
}

}  // namespace optgym::tinyir
