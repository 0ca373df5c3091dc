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

#include "optgym/tinyir/passes.hpp"

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "optgym/common/error.hpp"

namespace optgym::tinyir {
namespace {

std::uint64_t apply(Opcode op, std::uint64_t a, std::uint64_t b) {
  switch (op) {
    case Opcode::add: return a + b;
    case Opcode::sub: return a - b;
    case Opcode::mul: return a * b;
    default: return 0;
  }
}

/// const value per register, for registers defined by `const`.
std::vector<std::optional<std::int64_t>> const_values(const Program& program) {
  std::vector<std::optional<std::int64_t>> values;
  for (const auto& inst : program.instructions) {
    if (!inst.defines()) continue;
    values.resize(static_cast<std::size_t>(inst.dest) + 1);
    if (inst.op == Opcode::constant) values[static_cast<std::size_t>(inst.dest)] = inst.value;
  }
  return values;
}

}  // namespace

std::string_view pass_name(Pass pass) {
  switch (pass) {
    case Pass::constfold: return "constfold";
    case Pass::dce: return "dce";
    case Pass::cse: return "cse";
    case Pass::copyprop: return "copyprop";
    case Pass::canonicalize: return "canonicalize";
    case Pass::strength_reduce: return "strength-reduce";
  }
  return "?";
}

Pass pass_from_name(std::string_view name) {
  for (Pass p : kPassCatalog) {
    if (pass_name(p) == name) return p;
  }
  throw Error(ErrorCode::unknown_pass, std::string(name));
}

Program constant_fold(const Program& program) {
  Program out = program;
  std::vector<std::optional<std::int64_t>> known(program.instructions.size());
  for (auto& inst : out.instructions) {
    if (!inst.defines()) continue;
    const auto d = static_cast<std::size_t>(inst.dest);
    if (inst.is_binop()) {
      const auto& a = known[static_cast<std::size_t>(inst.lhs)];
      const auto& b = known[static_cast<std::size_t>(inst.rhs)];
      if (a && b) {
        const auto v = apply(inst.op, static_cast<std::uint64_t>(*a), static_cast<std::uint64_t>(*b));
        inst = Instruction::constant(inst.dest, static_cast<std::int64_t>(v));
      }
    }
    if (inst.op == Opcode::constant) known[d] = inst.value;
  }
  return out;
}

Program dead_code_elimination(const Program& program) {
  const auto& insts = program.instructions;
  std::vector<bool> live(insts.size(), false);
  for (auto it = insts.rbegin(); it != insts.rend(); ++it) {
    const bool keep = it->op == Opcode::output ||
                      (it->defines() && live[static_cast<std::size_t>(it->dest)]);
    if (!keep) continue;
    if (it->lhs >= 0) live[static_cast<std::size_t>(it->lhs)] = true;
    if (it->rhs >= 0) live[static_cast<std::size_t>(it->rhs)] = true;
  }
  Program kept;
  kept.inputs_arity = program.inputs_arity;
  for (const auto& inst : insts) {
    if (inst.op == Opcode::output || live[static_cast<std::size_t>(inst.dest)]) {
      kept.instructions.push_back(inst);
    }
  }
  if (kept.instructions.size() == insts.size()) return program;
  return renumber(kept);
}

Program common_subexpression_elimination(const Program& program) {
  Program out = program;
  std::map<std::tuple<Opcode, int, int>, int> seen;
  for (auto& inst : out.instructions) {
    if (!inst.is_binop()) continue;
    const auto [it, inserted] = seen.try_emplace({inst.op, inst.lhs, inst.rhs}, inst.dest);
    if (!inserted) inst = Instruction::copy(inst.dest, it->second);
  }
  return out;
}

Program copy_propagation(const Program& program) {
  Program out = program;
  std::vector<int> root(program.instructions.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = static_cast<int>(i);
  auto resolve = [&](int r) { return r < 0 ? r : root[static_cast<std::size_t>(r)]; };
  for (auto& inst : out.instructions) {
    inst.lhs = resolve(inst.lhs);
    inst.rhs = resolve(inst.rhs);
    if (inst.op == Opcode::id) root[static_cast<std::size_t>(inst.dest)] = inst.lhs;
  }
  return out;
}

Program canonicalize(const Program& program) {
  Program out = program;
  for (auto& inst : out.instructions) {
    if ((inst.op == Opcode::add || inst.op == Opcode::mul) && inst.lhs > inst.rhs) {
      std::swap(inst.lhs, inst.rhs);
    }
  }
  return out;
}

Program strength_reduce(const Program& program) {
  Program out = program;
  const auto consts = const_values(program);
  auto is_two = [&](int r) {
    const auto& v = consts[static_cast<std::size_t>(r)];
    return v && *v == 2;
  };
  for (auto& inst : out.instructions) {
    if (inst.op != Opcode::mul) continue;
    if (is_two(inst.rhs)) {
      inst = Instruction::binop(Opcode::add, inst.dest, inst.lhs, inst.lhs);
    } else if (is_two(inst.lhs)) {
      inst = Instruction::binop(Opcode::add, inst.dest, inst.rhs, inst.rhs);
    }
  }
  return out;
}

Program run_pass(const Program& program, Pass pass) {
  switch (pass) {
    case Pass::constfold: return constant_fold(program);
    case Pass::dce: return dead_code_elimination(program);
    case Pass::cse: return common_subexpression_elimination(program);
    case Pass::copyprop: return copy_propagation(program);
    case Pass::canonicalize: return canonicalize(program);
    case Pass::strength_reduce: return strength_reduce(program);
  }
  throw Error(ErrorCode::unknown_pass, "invalid pass id");
}

Program baseline_pipeline(const Program& program) {
  static constexpr std::array<Pass, 5> kPipeline{Pass::canonicalize, Pass::constfold, Pass::cse,
                                                 Pass::copyprop, Pass::dce};
  Program current = program;
  for (int round = 0; round < 100; ++round) {
    Program next = current;
    for (Pass p : kPipeline) next = run_pass(next, p);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::int64_t baseline_cost(const Program& program) {
  return inst_count(baseline_pipeline(program));
}

}  // namespace optgym::tinyir
