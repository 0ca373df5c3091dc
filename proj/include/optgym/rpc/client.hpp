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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <future>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "optgym/rpc/spaces.hpp"

namespace optgym::rpc {

/// One multiplexed connection to a service. Safe to share across threads:
/// each call is tagged with a fresh request id and a reader thread routes
/// replies back to the waiting caller.
class Client {
 public:
  /// Takes ownership of a connected socket.
  explicit Client(int fd);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Sends `request` (its "id" is assigned here) and waits for the reply.
  /// Throws Error(timeout) when the deadline passes and Error(backend_crash)
  /// when the connection breaks. Error replies are returned, not thrown.
  json call(json request, std::chrono::steady_clock::duration timeout);

  bool broken() const { return broken_; }
  std::uint64_t round_trips() const { return round_trips_; }

 private:
  void reader_loop();
  void fail_all(const std::string& why);

  int fd_;
  std::mutex write_mu_;
  std::mutex pending_mu_;
  std::unordered_map<std::uint64_t, std::promise<json>> pending_;
  std::atomic<bool> broken_{false};
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> round_trips_{0};
  std::thread reader_;
};

}  // namespace optgym::rpc
