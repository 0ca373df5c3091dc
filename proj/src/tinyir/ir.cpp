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

#include "optgym/tinyir/ir.hpp"

#include <charconv>
#include <unordered_map>

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"

namespace optgym::tinyir {
namespace {

std::string reg(int r) { return "r" + std::to_string(r); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) tokens.push_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::int64_t parse_int(std::string_view token, int line_no) {
  std::int64_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::parse_error,
                "line " + std::to_string(line_no) + ": bad integer '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::constant: return "const";
    case Opcode::add: return "add";
    case Opcode::sub: return "sub";
    case Opcode::mul: return "mul";
    case Opcode::id: return "id";
    case Opcode::input: return "input";
    case Opcode::output: return "output";
  }
  return "?";
}

std::string to_text(const Program& program) {
  std::string out = "inputs " + std::to_string(program.inputs_arity) + "\n";
  for (const auto& inst : program.instructions) {
    switch (inst.op) {
      case Opcode::constant:
        out += reg(inst.dest) + " = const " + std::to_string(inst.value);
        break;
      case Opcode::add:
      case Opcode::sub:
      case Opcode::mul:
        out += reg(inst.dest) + " = " + std::string(opcode_name(inst.op)) + " " + reg(inst.lhs) +
               ", " + reg(inst.rhs);
        break;
      case Opcode::id:
        out += reg(inst.dest) + " = id " + reg(inst.lhs);
        break;
      case Opcode::input:
        out += reg(inst.dest) + " = input " + std::to_string(inst.value);
        break;
      case Opcode::output:
        out += "output " + reg(inst.lhs);
        break;
    }
    out += '\n';
  }
  return out;
}

Program parse(std::string_view text) {
  Program program;
  bool have_header = false;
  std::unordered_map<std::string, int> names;
  int line_no = 0;
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + why);
  };
  auto use = [&](std::string_view name) {
    const auto it = names.find(std::string(name));
    if (it == names.end()) {
      throw Error(ErrorCode::malformed_program, "line " + std::to_string(line_no) +
                                                    ": use of undefined register " +
                                                    std::string(name));
    }
    return it->second;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_tokens(line);

    if (tokens[0] == "inputs") {
      if (have_header || !program.instructions.empty() || tokens.size() != 2) {
        throw fail("misplaced inputs header");
      }
      program.inputs_arity = static_cast<int>(parse_int(tokens[1], line_no));
      if (program.inputs_arity < 0) throw fail("negative arity");
      have_header = true;
      continue;
    }
    if (tokens[0] == "output") {
      if (tokens.size() != 2) throw fail("output takes one register");
      program.instructions.push_back(Instruction::output(use(tokens[1])));
      continue;
    }
    if (tokens.size() < 3 || tokens[1] != "=") throw fail("expected 'rN = op args'");
    if (tokens[0].size() < 2 || tokens[0][0] != 'r') throw fail("bad register name");
    const std::string dest_name(tokens[0]);
    if (names.contains(dest_name)) {
      throw Error(ErrorCode::malformed_program,
                  "line " + std::to_string(line_no) + ": register redefined " + dest_name);
    }
    const std::string_view op = tokens[2];
    const int dest = static_cast<int>(names.size());
    Instruction inst;
    if (op == "const" && tokens.size() == 4) {
      inst = Instruction::constant(dest, parse_int(tokens[3], line_no));
    } else if (op == "input" && tokens.size() == 4) {
      inst = Instruction::input(dest, parse_int(tokens[3], line_no));
    } else if (op == "id" && tokens.size() == 4) {
      inst = Instruction::copy(dest, use(tokens[3]));
    } else if ((op == "add" || op == "sub" || op == "mul") && tokens.size() == 5) {
      const Opcode code = op == "add" ? Opcode::add : op == "sub" ? Opcode::sub : Opcode::mul;
      inst = Instruction::binop(code, dest, use(tokens[3]), use(tokens[4]));
    } else {
      throw fail("unknown instruction '" + std::string(line) + "'");
    }
    names.emplace(dest_name, dest);
    program.instructions.push_back(inst);
  }
  validate(program);
  return program;
}

void validate(const Program& program) {
  if (program.inputs_arity < 0) throw Error(ErrorCode::malformed_program, "negative arity");
  int next = 0;
  bool has_output = false;
  auto check_use = [&](int r, std::size_t at) {
    if (r < 0 || r >= next) {
      throw Error(ErrorCode::malformed_program,
                  "instruction " + std::to_string(at) + " uses undefined register r" +
                      std::to_string(r));
    }
  };
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    const auto& inst = program.instructions[i];
    switch (inst.op) {
      case Opcode::add:
      case Opcode::sub:
      case Opcode::mul:
        check_use(inst.lhs, i);
        check_use(inst.rhs, i);
        break;
      case Opcode::id:
        check_use(inst.lhs, i);
        break;
      case Opcode::output:
        check_use(inst.lhs, i);
        has_output = true;
        break;
      case Opcode::input:
        if (inst.value < 0 || inst.value >= program.inputs_arity) {
          throw Error(ErrorCode::malformed_program,
                      "input index " + std::to_string(inst.value) + " out of range");
        }
        break;
      case Opcode::constant:
        break;
    }
    if (inst.defines()) {
      if (inst.dest != next) {
        throw Error(ErrorCode::malformed_program,
                    "registers not dense at instruction " + std::to_string(i));
      }
      ++next;
    }
  }
  if (!has_output) throw Error(ErrorCode::malformed_program, "program has no output");
}

Program renumber(const Program& program) {
  Program out;
  out.inputs_arity = program.inputs_arity;
  out.instructions.reserve(program.instructions.size());
  std::unordered_map<int, int> map;
  auto remap = [&](int r) { return r < 0 ? r : map.at(r); };
  for (auto inst : program.instructions) {
    inst.lhs = remap(inst.lhs);
    inst.rhs = remap(inst.rhs);
    if (inst.defines()) {
      const int fresh = static_cast<int>(map.size());
      map[inst.dest] = fresh;
      inst.dest = fresh;
    }
    out.instructions.push_back(inst);
  }
  return out;
}

std::int64_t inst_count(const Program& program) {
  return static_cast<std::int64_t>(program.instructions.size());
}

OpcodeHistogram opcode_histogram(const Program& program) {
  OpcodeHistogram h{};
  for (const auto& inst : program.instructions) ++h[static_cast<std::size_t>(inst.op)];
  return h;
}

std::string state_digest(const Program& program) { return sha256_hex(to_text(program)); }

}  // namespace optgym::tinyir
