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
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "optgym/rpc/backend.hpp"
#include "optgym/rpc/executor.hpp"
#include "optgym/rpc/wire.hpp"

namespace optgym::rpc {

struct ServiceConfig {
  double per_call_timeout = 300;  // seconds
  double start_timeout = 60;      // seconds
  int max_retries = 1;            // automatic restarts per service lifetime
  int session_cap = 64;
  int cache_capacity = 128;  // parsed benchmarks, LRU

  /// Throws Error(invalid_argument) unless every field is positive.
  void validate() const;
  /// Applies OPTGYM_SERVICE_TIMEOUT (seconds) to per_call_timeout, if set.
  ServiceConfig with_env_overrides() const;
  json to_json() const;
};

/// LRU map from "uri\ncontent-digest" to a parsed benchmark.
class BenchmarkCache {
 public:
  explicit BenchmarkCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const LoadedBenchmark> get(const std::string& key);
  void put(const std::string& key, std::shared_ptr<const LoadedBenchmark> value);
  void clear();
  std::size_t size() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const LoadedBenchmark>>;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

/// Maps a CompilationBackend onto the wire protocol. Requests for one session
/// run in arrival order on that session's strand; distinct sessions run in
/// parallel on a worker pool. A watchdog answers calls that outlive
/// per_call_timeout with Error(timeout) and marks their session dead.
class ServiceRuntime {
 public:
  ServiceRuntime(std::unique_ptr<CompilationBackend> backend, ServiceConfig config);
  ~ServiceRuntime();

  /// Serves one connection until EOF. Replies are written to `out_fd`.
  void serve_connection(int in_fd, int out_fd);
  /// Accept loop; each connection gets its own reader thread. Returns when
  /// the listening socket is shut down.
  void serve_tcp(int listen_fd);

  ServiceStats stats() const;

 private:
  struct Connection;
  struct Session;
  struct InFlight {
    std::chrono::steady_clock::time_point deadline;
    std::uint64_t session_id;  // 0 for StartSession
    std::shared_ptr<Connection> conn;
    std::uint64_t request_id;
    std::shared_ptr<std::atomic<bool>> replied;
  };
  using Reply = std::function<void(const json&)>;

  void dispatch(const std::shared_ptr<Connection>& conn, json request);
  json handle_get_spaces(const json& request) const;
  /// Returns false, having done nothing, on a cache miss when !allow_load.
  bool handle_start_session(const json& request, const Reply& reply, bool allow_load);
  void handle_step(Session& session, const json& request, const Reply& reply);
  void handle_fork(Session& session, const json& request, const Reply& reply);

  std::shared_ptr<Session> find_session(std::uint64_t id) const;
  bool is_dead(std::uint64_t id) const;
  /// Reserves a session slot; throws Error(session_cap_exceeded).
  void reserve_slot();
  void release_slot();
  std::uint64_t register_session(std::unique_ptr<CompilationSession> impl,
                                 const SpaceDescriptor& action_space);
  void kill_session(std::uint64_t id);

  std::uint64_t watch(const InFlight& call);
  void unwatch(std::uint64_t token);
  void watchdog_loop();

  std::unique_ptr<CompilationBackend> backend_;
  ServiceConfig config_;
  std::vector<SpaceDescriptor> action_spaces_;
  std::vector<SpaceDescriptor> observation_spaces_;
  BenchmarkCache cache_;
  std::unique_ptr<ThreadPool> pool_;

  mutable std::mutex sessions_mu_;
  std::unordered_map<std::uint64_t, std::shared_ptr<Session>> sessions_;
  std::set<std::uint64_t> dead_;
  std::uint64_t next_session_id_ = 1;
  int reserved_ = 0;

  std::mutex watch_mu_;
  std::condition_variable watch_cv_;
  std::map<std::uint64_t, InFlight> in_flight_;
  std::uint64_t next_token_ = 1;
  bool stopping_ = false;
  std::thread watchdog_;

  std::atomic<std::int64_t> cache_hits_{0};
  std::atomic<std::int64_t> cache_misses_{0};
  std::atomic<std::int64_t> loads_{0};
  std::atomic<std::int64_t> started_{0};
  std::atomic<std::int64_t> timeouts_{0};

  std::mutex threads_mu_;
  std::vector<std::thread> connection_threads_;
  std::set<int> open_fds_;
};

using BackendFactory =
    std::function<std::unique_ptr<CompilationBackend>(const std::vector<std::string>& args)>;

/// Entry point shared by the backend executables:
///   <backend> --port=<p> | --stdio [--timeout=s] [--session-cap=n] [--cache-capacity=n] [extra...]
/// With --port, prints "listening on port <n>" on stdout once ready. Unknown
/// options are passed to the factory.
int service_main(int argc, char** argv, const std::string& name, const BackendFactory& factory);

}  // namespace optgym::rpc
