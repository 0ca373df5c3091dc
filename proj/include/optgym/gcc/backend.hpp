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

#include <chrono>
#include <memory>

#include "optgym/gcc/measure.hpp"
#include "optgym/gcc/spec.hpp"
#include "optgym/rpc/backend.hpp"

namespace optgym::gcc {

/// Action space ids.
inline constexpr char kCategoricalSpace[] = "categorical";
inline constexpr char kChoicesSpace[] = "choices";
/// Observation space ids.
inline constexpr char kAsmSize[] = "asm_size";
inline constexpr char kObjSize[] = "obj_size";
inline constexpr char kAsmSizeOs[] = "asm_size_os";
inline constexpr char kObjSizeOs[] = "obj_size_os";
inline constexpr char kChoices[] = "choices";
inline constexpr char kCommandLine[] = "command_line";
inline constexpr char kSource[] = "source";
inline constexpr char kDigest[] = "Digest";

/// Every benchmark must come with its C source text. Loading a benchmark
/// compiles it once with no flags and fails with Error(compile_error) if that
/// does not work.
std::unique_ptr<rpc::CompilationBackend> make_backend(GccSpec spec, std::shared_ptr<Measurer> measurer);

}  // namespace optgym::gcc
