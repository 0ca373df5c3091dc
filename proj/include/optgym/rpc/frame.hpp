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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace optgym::rpc {

/// Frames are a 4-byte big-endian body length followed by the UTF-8 JSON body.
inline constexpr std::uint32_t kMaxFrameBytes = 256u << 20;

std::string encode_frame(std::string_view body);

/// Writes one frame; throws Error(backend_crash) if the peer is gone.
void write_frame(int fd, std::string_view body);

/// Reads one frame. Returns nullopt on clean EOF at a frame boundary. Throws
/// Error(protocol_error) on truncated or oversized frames.
std::optional<std::string> read_frame(int fd);

/// Binds 127.0.0.1:`port` (0 picks a free port) and listens. Returns the fd
/// and writes the bound port to `bound_port`.
int listen_tcp(std::uint16_t port, std::uint16_t& bound_port);
int accept_connection(int listen_fd);
/// Connects to host:port. Throws Error(backend_unavailable) on failure.
int connect_tcp(const std::string& host, std::uint16_t port,
                std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace optgym::rpc
