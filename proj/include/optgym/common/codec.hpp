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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace optgym {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex SHA-256 of `data` (64 chars).
std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);

std::string base64_encode(std::span<const std::uint8_t> data);
std::string base64_encode(std::string_view data);
Bytes base64_decode(std::string_view text);

/// zlib deflate / inflate.
Bytes compress(std::string_view data);
std::string decompress(std::span<const std::uint8_t> data);

}  // namespace optgym
