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

#include "optgym/rpc/runtime.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"
#include "optgym/rpc/frame.hpp"

namespace optgym::rpc {

void ServiceConfig::validate() const {
  if (per_call_timeout <= 0 || start_timeout <= 0 || max_retries <= 0 || session_cap <= 0 ||
      cache_capacity <= 0) {
    throw Error(ErrorCode::invalid_argument, "service config fields must be positive: " +
                                                 to_json().dump());
  }
}

ServiceConfig ServiceConfig::with_env_overrides() const {
  ServiceConfig c = *this;
  if (const char* t = std::getenv("OPTGYM_SERVICE_TIMEOUT"); t != nullptr && *t != '\0') {
    char* end = nullptr;
    const double v = std::strtod(t, &end);
    if (end == t || *end != '\0' || v <= 0) {
      throw Error(ErrorCode::invalid_argument, std::string("bad OPTGYM_SERVICE_TIMEOUT: ") + t);
    }
    c.per_call_timeout = v;
  }
  return c;
}

json ServiceConfig::to_json() const {
  return json{{"per_call_timeout", per_call_timeout}, {"start_timeout", start_timeout},
              {"max_retries", max_retries},           {"session_cap", session_cap},
              {"cache_capacity", cache_capacity}};
}

std::string CompilationBackend::content_digest(const std::string& uri,
                                               const std::optional<std::string>& content) const {
  if (!content) throw Error(ErrorCode::unknown_benchmark, uri);
  return sha256_hex(*content);
}

std::shared_ptr<const LoadedBenchmark> BenchmarkCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  const auto it = index_.find(key);
  if (it == index_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void BenchmarkCache::put(const std::string& key, std::shared_ptr<const LoadedBenchmark> value) {
  std::lock_guard lock(mu_);
  if (const auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(value);
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, std::move(value));
  index_[key] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

void BenchmarkCache::clear() {
  std::lock_guard lock(mu_);
  order_.clear();
  index_.clear();
}

std::size_t BenchmarkCache::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

struct ServiceRuntime::Connection {
  int out_fd;
  std::mutex write_mu;
  bool closed = false;

  void send(const json& message) {
    std::lock_guard lock(write_mu);
    if (closed) return;
    try {
      write_frame(out_fd, message.dump());
    } catch (const Error&) {
      closed = true;
    }
  }
};

struct ServiceRuntime::Session {
  std::uint64_t id = 0;
  std::shared_ptr<Strand> strand;
  std::unique_ptr<CompilationSession> impl;
  SpaceDescriptor action_space;
  bool done = false;
  std::atomic<bool> dead{false};
};

ServiceRuntime::ServiceRuntime(std::unique_ptr<CompilationBackend> backend, ServiceConfig config)
    : backend_(std::move(backend)),
      config_(config),
      action_spaces_(backend_->action_spaces()),
      observation_spaces_(backend_->observation_spaces()),
      cache_(static_cast<std::size_t>(config.cache_capacity)),
      pool_(std::make_unique<ThreadPool>(std::max(4u, std::thread::hardware_concurrency()))) {
  config_.validate();
  validate_space_list(action_spaces_);
  validate_space_list(observation_spaces_);
  watchdog_ = std::thread([this] { watchdog_loop(); });
}

ServiceRuntime::~ServiceRuntime() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(threads_mu_);
    for (const int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(connection_threads_);
  }
  for (auto& t : threads) t.join();
  pool_.reset();  // runs whatever is still queued
  {
    std::lock_guard lock(watch_mu_);
    stopping_ = true;
  }
  watch_cv_.notify_all();
  watchdog_.join();
}

ServiceStats ServiceRuntime::stats() const {
  ServiceStats s;
  s.cache_hits = cache_hits_;
  s.cache_misses = cache_misses_;
  s.benchmark_loads = loads_;
  s.cache_size = static_cast<std::int64_t>(cache_.size());
  {
    std::lock_guard lock(sessions_mu_);
    s.live_sessions = static_cast<std::int64_t>(sessions_.size());
  }
  s.sessions_started = started_;
  s.timeouts = timeouts_;
  return s;
}

void ServiceRuntime::serve_connection(int in_fd, int out_fd) {
  auto conn = std::make_shared<Connection>();
  conn->out_fd = out_fd;
  for (;;) {
    std::optional<std::string> frame;
    try {
      frame = read_frame(in_fd);
    } catch (const Error&) {
      break;
    }
    if (!frame) break;
    json request;
    try {
      request = json::parse(*frame);
      if (!request.is_object() || !request.contains("id")) {
        throw Error(ErrorCode::protocol_error, "request without id");
      }
    } catch (const std::exception& e) {
      conn->send(make_error_reply(0, ErrorCode::protocol_error, e.what()));
      continue;
    }
    dispatch(conn, std::move(request));
  }
  std::lock_guard lock(conn->write_mu);
  conn->closed = true;
}

void ServiceRuntime::serve_tcp(int listen_fd) {
  for (;;) {
    const int fd = accept_connection(listen_fd);
    if (fd < 0) return;
    std::lock_guard lock(threads_mu_);
    open_fds_.insert(fd);
    connection_threads_.emplace_back([this, fd] {
      serve_connection(fd, fd);
      std::lock_guard inner(threads_mu_);
      open_fds_.erase(fd);
      ::close(fd);
    });
  }
}

void ServiceRuntime::dispatch(const std::shared_ptr<Connection>& conn, json request) {
  const std::uint64_t id = request.value("id", std::uint64_t{0});
  RequestKind kind;
  try {
    kind = request_kind_from_string(request.value("kind", ""));
  } catch (const Error& e) {
    conn->send(make_error_reply(id, e.code(), e.detail()));
    return;
  }

  switch (kind) {
    case RequestKind::get_spaces:
      conn->send(handle_get_spaces(request));
      return;
    case RequestKind::get_stats: {
      json r = make_reply(request);
      r["stats"] = stats();
      conn->send(r);
      return;
    }
    case RequestKind::clear_cache:
      cache_.clear();
      conn->send(make_reply(request));
      return;
    default:
      break;
  }

  auto replied = std::make_shared<std::atomic<bool>>(false);
  std::uint64_t session_id = 0;
  std::shared_ptr<Session> session;
  if (kind != RequestKind::start_session) {
    session_id = request.value("session_id", std::uint64_t{0});
    session = find_session(session_id);
    if (!session) {
      if (kind == RequestKind::end_session && is_dead(session_id)) {
        std::lock_guard lock(sessions_mu_);
        dead_.erase(session_id);
        conn->send(make_reply(request));
        return;
      }
      const ErrorCode code =
          is_dead(session_id) ? ErrorCode::session_expired : ErrorCode::session_not_found;
      conn->send(make_error_reply(id, code, "session " + std::to_string(session_id)));
      return;
    }
  }

  const auto timeout = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(config_.per_call_timeout));
  const std::uint64_t token = kind == RequestKind::end_session
                                  ? 0
                                  : watch({std::chrono::steady_clock::now() + timeout, session_id,
                                           conn, id, replied});
  Reply reply = [this, conn, replied, token](const json& message) {
    if (token != 0) unwatch(token);
    if (!replied->exchange(true)) conn->send(message);
  };
  auto guarded = [reply, id](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      reply(make_error_reply(id, e.code(), e.detail()));
    } catch (const std::exception& e) {
      reply(make_error_reply(id, ErrorCode::backend_crash, e.what()));
    }
  };

  switch (kind) {
    case RequestKind::start_session: {
      // Cache hits are answered from the reader thread; loads go to the pool.
      bool done = true;
      guarded([&] { done = handle_start_session(request, reply, false); });
      if (done) return;
      pool_->post([this, request = std::move(request), reply, guarded] {
        guarded([&] { handle_start_session(request, reply, true); });
      });
      return;
    }
    case RequestKind::step:
      session->strand->post([this, session, request = std::move(request), reply, guarded] {
        guarded([&] { handle_step(*session, request, reply); });
      });
      return;
    case RequestKind::fork:
      session->strand->post([this, session, request = std::move(request), reply, guarded] {
        guarded([&] { handle_fork(*session, request, reply); });
      });
      return;
    case RequestKind::end_session:
      session->strand->post([this, session, request = std::move(request), reply] {
        bool removed = false;
        {
          std::lock_guard lock(sessions_mu_);
          removed = sessions_.erase(session->id) > 0;
          dead_.erase(session->id);
        }
        if (removed) release_slot();
        session->dead = true;
        reply(make_reply(request));
      });
      return;
    default:
      return;
  }
}

json ServiceRuntime::handle_get_spaces(const json& request) const {
  json r = make_reply(request);
  r["action_spaces"] = action_spaces_;
  r["observation_spaces"] = observation_spaces_;
  return r;
}

bool ServiceRuntime::handle_start_session(const json& request, const Reply& reply, bool allow_load) {
  const std::string uri = request.at("benchmark").get<std::string>();
  const std::string space_id = request.value("action_space", std::string());
  std::optional<std::string> content;
  if (request.contains("content") && !request.at("content").is_null()) {
    content = request.at("content").get<std::string>();
  }
  const SpaceDescriptor* space =
      space_id.empty() ? &action_spaces_.front() : find_space(action_spaces_, space_id);
  if (space == nullptr) throw Error(ErrorCode::unknown_space, "action space " + space_id);

  std::vector<const SpaceDescriptor*> observe;
  if (request.contains("observation_spaces")) {
    for (const auto& o : request.at("observation_spaces")) {
      const auto id = o.get<std::string>();
      const SpaceDescriptor* s = find_space(observation_spaces_, id);
      if (s == nullptr) throw Error(ErrorCode::unknown_space, "observation space " + id);
      observe.push_back(s);
    }
  }

  const std::string key = uri + "\n" + backend_->content_digest(uri, content);
  auto benchmark = cache_.get(key);
  if (!benchmark && !allow_load) return false;

  reserve_slot();
  try {
    if (benchmark) {
      ++cache_hits_;
    } else {
      ++cache_misses_;
      ++loads_;
      benchmark = backend_->load_benchmark(uri, content);
      cache_.put(key, benchmark);
    }
    auto impl = backend_->create_session();
    impl->init(*space, benchmark);
    json observations = json::array();
    for (const auto* s : observe) observations.push_back(observation_to_json(impl->set_observation(*s)));
    const std::uint64_t sid = register_session(std::move(impl), *space);
    ++started_;
    json r = make_reply(request);
    r["session_id"] = sid;
    r["observations"] = std::move(observations);
    reply(r);
  } catch (...) {
    release_slot();
    throw;
  }
  return true;
}

void ServiceRuntime::handle_step(Session& session, const json& request, const Reply& reply) {
  if (session.dead) throw Error(ErrorCode::session_expired, "session " + std::to_string(session.id));
  std::vector<Action> actions;
  for (const auto& a : request.at("actions")) actions.push_back(action_from_json(a));
  std::vector<const SpaceDescriptor*> spaces;
  for (const auto& o : request.at("observation_spaces")) {
    const auto id = o.get<std::string>();
    const SpaceDescriptor* s = find_space(observation_spaces_, id);
    if (s == nullptr) throw Error(ErrorCode::unknown_space, "observation space " + id);
    spaces.push_back(s);
  }
  for (const auto& a : actions) check_action(session.action_space, a);
  if (session.done && !actions.empty()) {
    throw Error(ErrorCode::episode_done, "session " + std::to_string(session.id));
  }

  json r = make_reply(request);
  bool changed = false;
  for (const auto& a : actions) {
    const ActionOutcome outcome = session.impl->apply_action(a);
    if (outcome.action_space_changed && outcome.new_action_space) {
      session.action_space = *outcome.new_action_space;
      changed = true;
    }
    if (outcome.end_of_episode) {
      session.done = true;
      break;
    }
  }
  json observations = json::array();
  for (const auto* s : spaces) observations.push_back(observation_to_json(session.impl->set_observation(*s)));
  r["observations"] = std::move(observations);
  r["end_of_episode"] = session.done;
  r["action_space_changed"] = changed;
  if (changed) r["action_space"] = session.action_space;
  reply(r);
}

void ServiceRuntime::handle_fork(Session& session, const json& request, const Reply& reply) {
  if (session.dead) throw Error(ErrorCode::session_expired, "session " + std::to_string(session.id));
  reserve_slot();
  try {
    auto impl = session.impl->fork();
    const std::uint64_t sid = register_session(std::move(impl), session.action_space);
    {
      std::lock_guard lock(sessions_mu_);
      sessions_.at(sid)->done = session.done;
    }
    json r = make_reply(request);
    r["session_id"] = sid;
    reply(r);
  } catch (...) {
    release_slot();
    throw;
  }
}

std::shared_ptr<ServiceRuntime::Session> ServiceRuntime::find_session(std::uint64_t id) const {
  std::lock_guard lock(sessions_mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool ServiceRuntime::is_dead(std::uint64_t id) const {
  std::lock_guard lock(sessions_mu_);
  return dead_.count(id) > 0;
}

void ServiceRuntime::reserve_slot() {
  std::lock_guard lock(sessions_mu_);
  if (reserved_ >= config_.session_cap) {
    throw Error(ErrorCode::session_cap_exceeded,
                "service holds " + std::to_string(reserved_) + " sessions (cap " +
                    std::to_string(config_.session_cap) + ")");
  }
  ++reserved_;
}

void ServiceRuntime::release_slot() {
  std::lock_guard lock(sessions_mu_);
  --reserved_;
}

std::uint64_t ServiceRuntime::register_session(std::unique_ptr<CompilationSession> impl,
                                               const SpaceDescriptor& action_space) {
  auto s = std::make_shared<Session>();
  s->strand = std::make_shared<Strand>(*pool_);
  s->impl = std::move(impl);
  s->action_space = action_space;
  std::lock_guard lock(sessions_mu_);
  s->id = next_session_id_++;
  sessions_.emplace(s->id, s);
  return s->id;
}

void ServiceRuntime::kill_session(std::uint64_t id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(sessions_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    s = it->second;
    sessions_.erase(it);
    dead_.insert(id);
    --reserved_;
  }
  s->dead = true;
}

std::uint64_t ServiceRuntime::watch(const InFlight& call) {
  std::lock_guard lock(watch_mu_);
  const std::uint64_t token = next_token_++;
  in_flight_.emplace(token, call);
  watch_cv_.notify_all();
  return token;
}

void ServiceRuntime::unwatch(std::uint64_t token) {
  std::lock_guard lock(watch_mu_);
  in_flight_.erase(token);
}

void ServiceRuntime::watchdog_loop() {
  std::unique_lock lock(watch_mu_);
  while (!stopping_) {
    if (in_flight_.empty()) {
      watch_cv_.wait(lock);
      continue;
    }
    auto earliest = in_flight_.begin()->second.deadline;
    for (const auto& [token, call] : in_flight_) earliest = std::min(earliest, call.deadline);
    if (watch_cv_.wait_until(lock, earliest) != std::cv_status::timeout) continue;

    std::vector<InFlight> expired;
    const auto now = std::chrono::steady_clock::now();
    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
      if (it->second.deadline <= now) {
        expired.push_back(it->second);
        it = in_flight_.erase(it);
      } else {
        ++it;
      }
    }
    lock.unlock();
    for (const auto& call : expired) {
      if (call.replied->exchange(true)) continue;
      ++timeouts_;
      if (call.session_id != 0) kill_session(call.session_id);
      call.conn->send(make_error_reply(
          call.request_id, ErrorCode::timeout,
          "exceeded per-call timeout of " + std::to_string(config_.per_call_timeout) + " s"));
    }
    lock.lock();
  }
}

int service_main(int argc, char** argv, const std::string& name, const BackendFactory& factory) {
  CLI::App app{name + " compilation service"};
  app.allow_extras();
  int port = -1;
  bool stdio = false;
  ServiceConfig config;
  std::optional<double> timeout;
  app.add_option("--port", port, "TCP port on 127.0.0.1 (0 picks a free one)");
  app.add_flag("--stdio", stdio, "Serve frames on stdin/stdout");
  app.add_option("--timeout", timeout, "Per-call timeout in seconds");
  app.add_option("--session-cap", config.session_cap);
  app.add_option("--cache-capacity", config.cache_capacity);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if ((port < 0) == !stdio) {
    std::cerr << name << ": exactly one of --port or --stdio is required\n";
    return 2;
  }
  try {
    config = config.with_env_overrides();
    if (timeout) config.per_call_timeout = *timeout;
    ServiceRuntime runtime(factory(app.remaining()), config);
    if (stdio) {
      runtime.serve_connection(STDIN_FILENO, STDOUT_FILENO);
      return 0;
    }
    std::uint16_t bound = 0;
    const int listen_fd = listen_tcp(static_cast<std::uint16_t>(port), bound);
    std::printf("listening on port %u\n", static_cast<unsigned>(bound));
    std::fflush(stdout);
    runtime.serve_tcp(listen_fd);
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace optgym::rpc
