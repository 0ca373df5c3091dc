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

#include <memory>

#include "optgym/rpc/backend.hpp"

namespace optgym::tinyir {

/// Observation space ids.
inline constexpr char kIr[] = "Ir";
inline constexpr char kInstCount[] = "InstCount";
inline constexpr char kOpcodeHistogram[] = "OpcodeHistogram";
inline constexpr char kBaselineCost[] = "BaselineCost";
inline constexpr char kDigest[] = "Digest";
/// The single action space: one action per pass, in catalog order.
inline constexpr char kPassesSpace[] = "passes";

/// Serves `benchmark://tinyir-gen-v0/seed-<n>` without content; every other
/// URI must come with its IR text.
std::unique_ptr<rpc::CompilationBackend> make_backend();

}  // namespace optgym::tinyir
