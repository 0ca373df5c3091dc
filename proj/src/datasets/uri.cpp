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

#include "optgym/datasets/uri.hpp"

#include <cctype>
#include <charconv>

#include "optgym/common/error.hpp"

namespace optgym {
namespace {
constexpr std::string_view kScheme = "benchmark://";
}

bool valid_dataset_name(std::string_view name) {
  const auto dash = name.rfind("-v");
  if (dash == std::string_view::npos || dash == 0 || dash + 2 >= name.size()) return false;
  for (std::size_t i = dash + 2; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
  }
  for (std::size_t i = 0; i < dash; ++i) {
    const char c = name[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') return false;
  }
  return true;
}

BenchmarkUri BenchmarkUri::parse(std::string_view text) {
  if (text.substr(0, kScheme.size()) != kScheme) {
    throw Error(ErrorCode::unknown_benchmark, "not a benchmark URI: " + std::string(text));
  }
  std::string_view rest = text.substr(kScheme.size());
  BenchmarkUri uri;
  const auto slash = rest.find('/');
  uri.dataset = std::string(rest.substr(0, slash));
  if (slash != std::string_view::npos) uri.path = std::string(rest.substr(slash + 1));
  if (!valid_dataset_name(uri.dataset)) {
    throw Error(ErrorCode::unknown_benchmark, "bad dataset name in " + std::string(text));
  }
  return uri;
}

std::string BenchmarkUri::str() const {
  std::string out = std::string(kScheme) + dataset;
  if (!path.empty()) out += "/" + path;
  return out;
}

std::optional<std::uint32_t> parse_seed_path(std::string_view path) {
  constexpr std::string_view kPrefix = "seed-";
  if (path.substr(0, kPrefix.size()) != kPrefix || path.size() == kPrefix.size()) return std::nullopt;
  const std::string_view digits = path.substr(kPrefix.size());
  if (digits.size() > 1 && digits[0] == '0') return std::nullopt;  // one spelling per seed
  std::uint32_t seed = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return seed;
}

}  // namespace optgym
