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
#include <optional>
#include <string>
#include <string_view>

namespace optgym {

/// `benchmark://<dataset>/<path>`, where the dataset name ends in `-v<int>`.
/// An empty path names the dataset itself.
struct BenchmarkUri {
  std::string dataset;
  std::string path;

  /// Throws Error(unknown_benchmark) on malformed input.
  static BenchmarkUri parse(std::string_view text);
  std::string str() const;

  bool operator==(const BenchmarkUri&) const = default;
  auto operator<=>(const BenchmarkUri&) const = default;
};

/// True when `name` looks like `<name>-v<digits>`.
bool valid_dataset_name(std::string_view name);

/// Parses the `seed-<u32>` path of a generator URI.
std::optional<std::uint32_t> parse_seed_path(std::string_view path);

}  // namespace optgym
