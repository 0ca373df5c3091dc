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

#include "optgym/tinyir/generator.hpp"

#include <array>
#include <vector>

#include "optgym/common/rng.hpp"

namespace optgym::tinyir {
namespace {

enum Kind : std::size_t { kConst, kAdd, kSub, kMul, kId, kInput, kKinds };

std::size_t pick_weighted(Rng& rng, const std::array<std::uint64_t, kKinds>& weights) {
  std::uint64_t total = 0;
  for (auto w : weights) total += w;
  std::uint64_t x = rng.below(total);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  return kConst;
}

int pick(Rng& rng, const std::vector<int>& regs) {
  return regs[static_cast<std::size_t>(rng.below(regs.size()))];
}

/// Live operands prefer values nobody has read yet, so that most live
/// instructions end up feeding an output.
int pick_live(Rng& rng, const std::vector<int>& live, std::vector<int>& unread) {
  if (!unread.empty() && rng.below(8) != 0) {
    const auto i = static_cast<std::size_t>(rng.below(unread.size()));
    const int r = unread[i];
    unread[i] = unread.back();
    unread.pop_back();
    return r;
  }
  return pick(rng, live);
}

}  // namespace

Program generate(std::uint32_t seed) {
  Rng rng(seed);
  const auto size = static_cast<int>(20 + rng.below(181));
  const auto arity = static_cast<int>(rng.below(5));
  const auto outputs = static_cast<int>(1 + rng.below(3));

  const double dead_fraction = 0.4 * rng.uniform01();
  std::array<std::uint64_t, kKinds> weights{};
  for (auto& w : weights) w = 1 + rng.below(8);
  if (arity == 0) weights[kInput] = 0;
  const double reuse = 0.25 * rng.uniform01();

  Program program;
  program.inputs_arity = arity;
  std::vector<int> all;
  std::vector<int> live;
  std::vector<int> unread;
  std::vector<std::size_t> live_binops;  // instruction indices

  for (int i = 0; i < size - outputs; ++i) {
    const bool dead = !live.empty() && rng.bernoulli(dead_fraction);
    const auto& pool = dead ? all : live;
    auto operand = [&] { return dead ? pick(rng, all) : pick_live(rng, live, unread); };
    const int dest = static_cast<int>(all.size());
    std::size_t kind = pick_weighted(rng, weights);
    if (pool.empty() && kind != kInput) kind = kConst;

    Instruction inst;
    switch (kind) {
      case kConst: {
        const std::int64_t v = rng.below(4) == 0 ? 2 : rng.uniform_int(-8, 16);
        inst = Instruction::constant(dest, v);
        break;
      }
      case kAdd:
      case kSub:
      case kMul: {
        if (!dead && !live_binops.empty() && rng.bernoulli(reuse)) {
          const auto& prev = program.instructions[live_binops[rng.below(live_binops.size())]];
          inst = Instruction::binop(prev.op, dest, prev.lhs, prev.rhs);
        } else {
          const Opcode op = kind == kAdd ? Opcode::add : kind == kSub ? Opcode::sub : Opcode::mul;
          const int lhs = operand();
          const int rhs = operand();
          inst = Instruction::binop(op, dest, lhs, rhs);
        }
        break;
      }
      case kId:
        inst = Instruction::copy(dest, operand());
        break;
      default:
        inst = Instruction::input(dest, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(arity))));
        break;
    }
    if (!dead && inst.is_binop()) live_binops.push_back(program.instructions.size());
    program.instructions.push_back(inst);
    all.push_back(dest);
    if (!dead) {
      live.push_back(dest);
      unread.push_back(dest);
    }
  }
  for (int i = 0; i < outputs; ++i) {
    const int src = rng.below(2) == 0 ? live.back() : pick_live(rng, live, unread);
    program.instructions.push_back(Instruction::output(src));
  }
  return program;
}

}  // namespace optgym::tinyir
