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

#include <sys/types.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "optgym/common/subprocess.hpp"
#include "optgym/rpc/client.hpp"
#include "optgym/rpc/runtime.hpp"

namespace optgym::rpc {

struct ServiceSpec {
  std::string backend;            // "tinyir" runs optgym-tinyir-service
  std::vector<std::string> args;  // forwarded to the backend
  ServiceConfig config;
  std::string endpoint;  // "host:port" of an already running service; empty spawns a child
  std::optional<std::filesystem::path> executable;  // overrides the service_dir() lookup

  /// Registry key: services are shared between specs with equal keys.
  std::string key() const;
};

/// A supervised backend process plus the connection to it. A crashed or
/// wedged process is restarted lazily, on the next call, at most
/// config.max_retries times over the service's lifetime. Sessions do not
/// survive a restart; callers detect that through generation().
class Service {
 public:
  /// Spawns the backend and waits for a GetSpaces round trip within
  /// start_timeout. Throws Error(spawn_failure) or Error(start_timeout).
  static std::shared_ptr<Service> start(ServiceSpec spec);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// One round trip. Error replies are thrown as Error. A broken connection
  /// surfaces as Error(backend_crash); a missing reply after
  /// per_call_timeout + 10 s as Error(timeout), after which the process is
  /// killed. Throws Error(backend_unavailable) once restarts are exhausted.
  /// With `allow_restart` false a dead service fails with Error(backend_crash)
  /// instead of being restarted (used for best-effort cleanup).
  json call(json request, bool allow_restart = true);

  const ServiceSpec& spec() const { return spec_; }
  const std::vector<SpaceDescriptor>& action_spaces() const { return action_spaces_; }
  const std::vector<SpaceDescriptor>& observation_spaces() const { return observation_spaces_; }

  /// Incremented on every (re)start.
  std::uint64_t generation() const;
  int restarts() const;
  pid_t pid() const;
  /// Wire round trips over the service lifetime, across restarts.
  std::uint64_t round_trips() const { return round_trips_; }

  ServiceStats stats();
  void clear_cache();

 private:
  explicit Service(ServiceSpec spec);
  void launch();  // requires mu_
  std::shared_ptr<Client> live_client(bool allow_restart);

  ServiceSpec spec_;
  mutable std::mutex mu_;
  ChildProcess child_;
  std::shared_ptr<Client> client_;
  std::uint64_t generation_ = 0;
  int restarts_ = 0;
  std::atomic<std::uint64_t> round_trips_{0};
  std::vector<SpaceDescriptor> action_spaces_;
  std::vector<SpaceDescriptor> observation_spaces_;
};

/// Reference-counted services keyed by ServiceSpec::key(). A service shuts
/// down when its last holder releases it.
class ServiceRegistry {
 public:
  static ServiceRegistry& global();
  std::shared_ptr<Service> acquire(const ServiceSpec& spec);

 private:
  std::mutex mu_;
  std::map<std::string, std::weak_ptr<Service>> services_;
};

inline std::shared_ptr<Service> start_service(const ServiceSpec& spec) {
  return ServiceRegistry::global().acquire(spec);
}

}  // namespace optgym::rpc
