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

#include "optgym/rpc/service.hpp"

#include <charconv>

#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/rpc/frame.hpp"

namespace optgym::rpc {
namespace {

std::chrono::steady_clock::duration seconds(double s) {
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(s));
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  unsigned port = 0;
  if (colon != std::string::npos) {
    const char* begin = endpoint.data() + colon + 1;
    const char* end = endpoint.data() + endpoint.size();
    const auto [ptr, ec] = std::from_chars(begin, end, port);
    if (ec == std::errc() && ptr == end && port > 0 && port < 65536) {
      return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
    }
  }
  throw Error(ErrorCode::invalid_argument, "endpoint must be host:port, got '" + endpoint + "'");
}

}  // namespace

std::string ServiceSpec::key() const {
  json j{{"backend", backend}, {"args", args}, {"config", config.to_json()}, {"endpoint", endpoint}};
  if (executable) j["executable"] = executable->string();
  return j.dump();
}

Service::Service(ServiceSpec spec) : spec_(std::move(spec)) {}

Service::~Service() {
  std::lock_guard lock(mu_);
  client_.reset();
  child_.kill();
}

std::shared_ptr<Service> Service::start(ServiceSpec spec) {
  spec.config = spec.config.with_env_overrides();
  spec.config.validate();
  std::shared_ptr<Service> service(new Service(std::move(spec)));
  std::lock_guard lock(service->mu_);
  service->launch();
  return service;
}

void Service::launch() {
  client_.reset();
  child_.kill();
  const auto deadline = std::chrono::steady_clock::now() + seconds(spec_.config.start_timeout);

  int fd = -1;
  if (!spec_.endpoint.empty()) {
    const auto [host, port] = split_endpoint(spec_.endpoint);
    fd = connect_tcp(host, port);
  } else {
    const std::filesystem::path exe =
        spec_.executable.value_or(service_dir() / ("optgym-" + spec_.backend + "-service"));
    if (!std::filesystem::exists(exe)) {
      throw Error(ErrorCode::spawn_failure, "no service executable at " + exe.string());
    }
    std::vector<std::string> argv{exe.string(), "--port=0",
                                  "--timeout=" + std::to_string(spec_.config.per_call_timeout),
                                  "--session-cap=" + std::to_string(spec_.config.session_cap),
                                  "--cache-capacity=" + std::to_string(spec_.config.cache_capacity)};
    argv.insert(argv.end(), spec_.args.begin(), spec_.args.end());
    child_ = ChildProcess::spawn(argv);
    const auto line = child_.read_line(deadline);
    if (!line) {
      if (child_.running()) {
        child_.kill();
        throw Error(ErrorCode::start_timeout, spec_.backend + " did not report a port in time");
      }
      throw Error(ErrorCode::spawn_failure, spec_.backend + " exited during startup");
    }
    constexpr std::string_view kPrefix = "listening on port ";
    unsigned port = 0;
    if (line->rfind(kPrefix, 0) != 0 ||
        std::from_chars(line->data() + kPrefix.size(), line->data() + line->size(), port).ec !=
            std::errc()) {
      child_.kill();
      throw Error(ErrorCode::spawn_failure, "unexpected startup line: " + *line);
    }
    fd = connect_tcp("127.0.0.1", static_cast<std::uint16_t>(port));
  }

  auto client = std::make_shared<Client>(fd);
  const auto remaining = deadline - std::chrono::steady_clock::now();
  json reply;
  try {
    reply = client->call(make_request(RequestKind::get_spaces),
                         std::max(remaining, std::chrono::steady_clock::duration::zero()));
    ++round_trips_;
  } catch (const Error& e) {
    child_.kill();
    throw Error(e.code() == ErrorCode::timeout ? ErrorCode::start_timeout : ErrorCode::spawn_failure,
                "readiness check failed: " + e.detail());
  }
  check_reply(reply);
  action_spaces_ = reply.at("action_spaces").get<std::vector<SpaceDescriptor>>();
  observation_spaces_ = reply.at("observation_spaces").get<std::vector<SpaceDescriptor>>();
  client_ = std::move(client);
  ++generation_;
}

std::shared_ptr<Client> Service::live_client(bool allow_restart) {
  std::lock_guard lock(mu_);
  const bool dead = !client_ || client_->broken() || (spec_.endpoint.empty() && !child_.running());
  if (!dead) return client_;
  if (!allow_restart) throw Error(ErrorCode::backend_crash, spec_.backend + " service is down");
  if (restarts_ >= spec_.config.max_retries) {
    throw Error(ErrorCode::backend_unavailable,
                spec_.backend + " service is down and its restart budget (" +
                    std::to_string(spec_.config.max_retries) + ") is spent");
  }
  ++restarts_;
  try {
    launch();
  } catch (const Error& e) {
    throw Error(ErrorCode::backend_unavailable, "restart failed: " + std::string(e.what()));
  }
  return client_;
}

json Service::call(json request, bool allow_restart) {
  auto client = live_client(allow_restart);
  json reply;
  try {
    reply = client->call(std::move(request), seconds(spec_.config.per_call_timeout + 10));
    ++round_trips_;
  } catch (const Error& e) {
    ++round_trips_;
    if (e.code() == ErrorCode::timeout) {
      // The service's own watchdog should have answered; treat it as wedged.
      std::lock_guard lock(mu_);
      if (client_ == client) child_.kill();
    }
    throw;
  }
  return check_reply(reply);
}

std::uint64_t Service::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

int Service::restarts() const {
  std::lock_guard lock(mu_);
  return restarts_;
}

pid_t Service::pid() const {
  std::lock_guard lock(mu_);
  return child_.pid();
}

ServiceStats Service::stats() {
  return call(make_request(RequestKind::get_stats)).at("stats").get<ServiceStats>();
}

void Service::clear_cache() { call(make_request(RequestKind::clear_cache)); }

ServiceRegistry& ServiceRegistry::global() {
  static ServiceRegistry registry;
  return registry;
}

std::shared_ptr<Service> ServiceRegistry::acquire(const ServiceSpec& spec) {
  ServiceSpec effective = spec;
  effective.config = effective.config.with_env_overrides();
  const std::string key = effective.key();
  std::lock_guard lock(mu_);
  if (auto existing = services_[key].lock()) return existing;
  auto service = Service::start(std::move(effective));
  services_[key] = service;
  return service;
}

}  // namespace optgym::rpc
