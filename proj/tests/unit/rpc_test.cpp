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

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <thread>

#include "optgym/common/error.hpp"
#include "optgym/rpc/client.hpp"
#include "optgym/rpc/frame.hpp"
#include "optgym/rpc/runtime.hpp"
#include "optgym/rpc/service.hpp"
#include "optgym/tinyir/backend.hpp"

namespace optgym::rpc {
namespace {

using namespace std::chrono_literals;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an optgym::Error";
  return ErrorCode::protocol_error;
}

// A counter whose "nap" action sleeps, for exercising the watchdog.
struct Counter final : LoadedBenchmark {};

class CounterSession final : public CompilationSession {
 public:
  void init(const SpaceDescriptor&, std::shared_ptr<const LoadedBenchmark>) override {}
  ActionOutcome apply_action(const Action& a) override {
    if (std::get<std::int64_t>(a) == 1) std::this_thread::sleep_for(1500ms);
    ++value_;
    return {};
  }
  ObservationValue set_observation(const SpaceDescriptor&) override { return value_; }
  std::unique_ptr<CompilationSession> fork() const override {
    return std::make_unique<CounterSession>(*this);
  }

 private:
  std::int64_t value_ = 0;
};

class CounterBackend final : public CompilationBackend {
 public:
  std::vector<SpaceDescriptor> action_spaces() const override {
    return {SpaceDescriptor::discrete_space("ops", {"inc", "nap"})};
  }
  std::vector<SpaceDescriptor> observation_spaces() const override {
    return {SpaceDescriptor::scalar("value", 0, 1e18)};
  }
  std::string content_digest(const std::string& uri, const std::optional<std::string>&) const override {
    return uri;
  }
  std::shared_ptr<const LoadedBenchmark> load_benchmark(const std::string&,
                                                        const std::optional<std::string>&) override {
    return std::make_shared<Counter>();
  }
  std::unique_ptr<CompilationSession> create_session() override {
    return std::make_unique<CounterSession>();
  }
};

// Runs a ServiceRuntime on a loopback port inside the test process.
class InProcess {
 public:
  explicit InProcess(ServiceConfig config)
      : runtime_(std::make_unique<CounterBackend>(), config) {
    std::uint16_t port = 0;
    listen_fd_ = listen_tcp(0, port);
    server_ = std::thread([this] { runtime_.serve_tcp(listen_fd_); });
    client_ = std::make_unique<Client>(connect_tcp("127.0.0.1", port));
  }
  ~InProcess() {
    client_.reset();
    ::shutdown(listen_fd_, SHUT_RDWR);
    server_.join();
    ::close(listen_fd_);
  }

  json call(json request) { return client_->call(std::move(request), 10s); }
  json start() {
    json r = make_request(RequestKind::start_session);
    r["benchmark"] = "benchmark://counter-v0/a";
    return call(r);
  }
  ServiceRuntime& runtime() { return runtime_; }

 private:
  ServiceRuntime runtime_;
  int listen_fd_ = -1;
  std::thread server_;
  std::unique_ptr<Client> client_;
};

json session_request(RequestKind kind, std::uint64_t sid) {
  json r = make_request(kind);
  r["session_id"] = sid;
  return r;
}

TEST(Frame, BigEndianLengthPrefix) {
  const std::string f = encode_frame("{}");
  ASSERT_EQ(f.size(), 6u);
  EXPECT_EQ(f.substr(0, 4), std::string("\0\0\0\2", 4));
  EXPECT_EQ(encode_frame(std::string(0x010203, 'x')).substr(0, 4), std::string("\0\1\2\3", 4));
}

TEST(Frame, PipeRoundTrip) {
  int fds[2];
  ASSERT_EQ(::pipe(fds), 0);
  write_frame(fds[1], "hello");
  write_frame(fds[1], "");
  ::close(fds[1]);
  EXPECT_EQ(read_frame(fds[0]), "hello");
  EXPECT_EQ(read_frame(fds[0]), "");
  EXPECT_EQ(read_frame(fds[0]), std::nullopt);
  ::close(fds[0]);
}

TEST(Spaces, JsonRoundTripAndValidation) {
  const std::vector<SpaceDescriptor> spaces{
      SpaceDescriptor::discrete_space("d", {"a", "b"}), SpaceDescriptor::box("b", {0, 0}, {3, 1}),
      SpaceDescriptor::scalar("s", 0, 10, false, true), SpaceDescriptor::text("t"),
      SpaceDescriptor::bytes("y"), SpaceDescriptor::vector("v", 7)};
  EXPECT_EQ(json(spaces).get<std::vector<SpaceDescriptor>>(), spaces);
  EXPECT_NO_THROW(validate_space_list(spaces));
  EXPECT_EQ(code_of([] { SpaceDescriptor::box("b", {2}, {1}).validate(); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { SpaceDescriptor::vector("v", 0).validate(); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { SpaceDescriptor::discrete_space("d", {}).validate(); }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] {
              validate_space_list({SpaceDescriptor::text("x"), SpaceDescriptor::text("x")});
            }),
            ErrorCode::invalid_argument);
}

TEST(Spaces, ObservationAndActionEncoding) {
  const std::vector<ObservationValue> values{std::int64_t{3}, 0.5, std::string("ir"),
                                             Bytes{0, 255, 7}, std::vector<std::int64_t>{1, -2}};
  for (const auto& v : values) EXPECT_EQ(observation_from_json(observation_to_json(v)), v);

  const auto box = SpaceDescriptor::box("b", {0, 0}, {3, 1});
  const Action a = std::vector<std::int64_t>{2, 1};
  EXPECT_EQ(action_name(box, a), "[2,1]");
  EXPECT_EQ(action_from_name(box, "[2,1]"), a);
  EXPECT_EQ(code_of([&] { check_action(box, std::vector<std::int64_t>{4, 0}); }),
            ErrorCode::out_of_range_action);
  const auto d = SpaceDescriptor::discrete_space("d", {"x", "y"});
  EXPECT_EQ(action_from_name(d, "y"), Action{std::int64_t{1}});
  EXPECT_EQ(code_of([&] { action_from_name(d, "z"); }), ErrorCode::out_of_range_action);
}

TEST(Runtime, ProtocolTotality) {
  InProcess svc(ServiceConfig{});
  const auto sid = check_reply(svc.start()).at("session_id").get<std::uint64_t>();

  json step = step_request(sid, {std::int64_t{0}, std::int64_t{0}}, {"value"});
  EXPECT_EQ(parse_step_reply(svc.call(step)).observations.at(0), ObservationValue{std::int64_t{2}});

  const auto child = check_reply(svc.call(session_request(RequestKind::fork, sid)))
                         .at("session_id")
                         .get<std::uint64_t>();
  check_reply(svc.call(session_request(RequestKind::end_session, sid)));
  EXPECT_EQ(parse_step_reply(svc.call(step_request(child, {std::int64_t{0}}, {"value"})))
                .observations.at(0),
            ObservationValue{std::int64_t{3}});

  for (RequestKind k : {RequestKind::step, RequestKind::fork}) {
    json r = k == RequestKind::step ? step_request(sid, {}, {}) : session_request(k, sid);
    EXPECT_EQ(code_of([&] { check_reply(svc.call(r)); }), ErrorCode::session_not_found);
  }
  EXPECT_EQ(code_of([&] { check_reply(svc.call(step_request(child, {std::int64_t{5}}, {}))); }),
            ErrorCode::out_of_range_action);
  EXPECT_EQ(code_of([&] { check_reply(svc.call(step_request(child, {}, {"nope"}))); }),
            ErrorCode::unknown_space);
  json bad = make_request(RequestKind::get_spaces);
  bad["kind"] = "Frobnicate";
  EXPECT_EQ(code_of([&] { check_reply(svc.call(bad)); }), ErrorCode::protocol_error);
}

TEST(Runtime, SessionCap) {
  ServiceConfig config;
  config.session_cap = 3;
  InProcess svc(config);
  std::vector<std::uint64_t> ids;
  for (int i = 0; i < 3; ++i) ids.push_back(check_reply(svc.start()).at("session_id"));
  EXPECT_EQ(code_of([&] { check_reply(svc.start()); }), ErrorCode::session_cap_exceeded);
  EXPECT_EQ(code_of([&] { check_reply(svc.call(session_request(RequestKind::fork, ids[0]))); }),
            ErrorCode::session_cap_exceeded);
  check_reply(svc.call(session_request(RequestKind::end_session, ids[0])));
  EXPECT_NO_THROW(check_reply(svc.start()));
}

TEST(Runtime, WatchdogTimesOutAndKillsSession) {
  ServiceConfig config;
  config.per_call_timeout = 0.3;
  InProcess svc(config);
  const auto sid = check_reply(svc.start()).at("session_id").get<std::uint64_t>();
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { check_reply(svc.call(step_request(sid, {std::int64_t{1}}, {}))); }),
            ErrorCode::timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 1200ms);
  EXPECT_EQ(code_of([&] { check_reply(svc.call(step_request(sid, {}, {}))); }),
            ErrorCode::session_expired);
  EXPECT_EQ(svc.runtime().stats().timeouts, 1);
  EXPECT_EQ(svc.runtime().stats().live_sessions, 0);
  check_reply(svc.call(session_request(RequestKind::end_session, sid)));
  EXPECT_EQ(code_of([&] { check_reply(svc.call(step_request(sid, {}, {}))); }),
            ErrorCode::session_not_found);
}

TEST(Runtime, SessionsProgressIndependently) {
  InProcess svc(ServiceConfig{});
  const auto slow = check_reply(svc.start()).at("session_id").get<std::uint64_t>();
  const auto fast = check_reply(svc.start()).at("session_id").get<std::uint64_t>();
  std::thread napper([&] { svc.call(step_request(slow, {std::int64_t{1}}, {})); });
  std::this_thread::sleep_for(100ms);
  const auto t0 = std::chrono::steady_clock::now();
  check_reply(svc.call(step_request(fast, {std::int64_t{0}}, {"value"})));
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 500ms);
  napper.join();
}

ServiceSpec tinyir_spec() {
  ServiceSpec spec;
  spec.backend = "tinyir";
  return spec;
}

std::uint64_t start_session(Service& svc, const std::string& uri) {
  json r = make_request(RequestKind::start_session);
  r["benchmark"] = uri;
  r["action_space"] = "passes";
  return svc.call(r).at("session_id").get<std::uint64_t>();
}

TEST(Service, TinyIrSpacesAndCache) {
  auto svc = Service::start(tinyir_spec());
  ASSERT_EQ(svc->action_spaces().size(), 1u);
  EXPECT_EQ(svc->action_spaces()[0].n, 6);
  EXPECT_GE(svc->observation_spaces().size(), 3u);

  const auto a = start_session(*svc, "benchmark://tinyir-gen-v0/seed-1");
  const auto before = svc->stats();
  const auto b = start_session(*svc, "benchmark://tinyir-gen-v0/seed-1");
  const auto after = svc->stats();
  EXPECT_EQ(after.cache_hits, before.cache_hits + 1);
  EXPECT_EQ(after.benchmark_loads, before.benchmark_loads);
  const auto obs = [&](std::uint64_t sid) {
    return parse_step_reply(svc->call(step_request(sid, {}, {"Ir", "InstCount"}))).observations;
  };
  EXPECT_EQ(obs(a), obs(b));

  EXPECT_EQ(code_of([&] { start_session(*svc, "benchmark://missing"); }), ErrorCode::unknown_benchmark);
  EXPECT_EQ(code_of([&] { start_session(*svc, "benchmark://tinyir-suite-v0/nope"); }),
            ErrorCode::unknown_benchmark);
}

TEST(Service, BatchIsOneRoundTrip) {
  auto svc = Service::start(tinyir_spec());
  const auto sid = start_session(*svc, "benchmark://tinyir-gen-v0/seed-3");
  const auto before = svc->round_trips();
  std::vector<Action> ten(10, Action{std::int64_t{1}});
  svc->call(step_request(sid, ten, {"InstCount"}));
  EXPECT_EQ(svc->round_trips(), before + 1);
}

TEST(Service, SpawnFailureAndRegistryReuse) {
  ServiceSpec bad = tinyir_spec();
  bad.executable = "/nonexistent/optgym-service";
  EXPECT_EQ(code_of([&] { Service::start(bad); }), ErrorCode::spawn_failure);
  bad.executable = "/etc/hostname";  // not an executable
  EXPECT_EQ(code_of([&] { Service::start(bad); }), ErrorCode::spawn_failure);

  auto a = start_service(tinyir_spec());
  auto b = start_service(tinyir_spec());
  EXPECT_EQ(a.get(), b.get());
  ServiceSpec other = tinyir_spec();
  other.config.session_cap = 8;
  EXPECT_NE(start_service(other).get(), a.get());
}

TEST(Service, CrashIsTypedAndRestartIsLazy) {
  auto svc = Service::start(tinyir_spec());
  const auto sid = start_session(*svc, "benchmark://tinyir-gen-v0/seed-1");
  const auto gen = svc->generation();
  ASSERT_EQ(::kill(svc->pid(), SIGKILL), 0);
  // Depending on whether the exit is noticed before the request is written,
  // the call either sees the broken connection or lands on the restarted
  // process, which no longer knows the session.
  const ErrorCode first = code_of([&] { svc->call(step_request(sid, {}, {"InstCount"})); });
  EXPECT_TRUE(first == ErrorCode::backend_crash || first == ErrorCode::session_not_found)
      << to_string(first);
  EXPECT_EQ(code_of([&] { svc->call(step_request(sid, {}, {"InstCount"})); }),
            ErrorCode::session_not_found);
  EXPECT_EQ(svc->generation(), gen + 1);
  EXPECT_NO_THROW(start_session(*svc, "benchmark://tinyir-gen-v0/seed-1"));

  // Default budget is one restart.
  ::kill(svc->pid(), SIGKILL);
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(code_of([&] { start_session(*svc, "benchmark://tinyir-gen-v0/seed-1"); }),
            ErrorCode::backend_unavailable);
}

TEST(Service, ForkCostIndependentOfHistory) {
  auto svc = Service::start(tinyir_spec());
  const auto median_fork_us = [&](std::uint64_t sid) {
    std::vector<double> t;
    for (int i = 0; i < 30; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto child = svc->call(session_request(RequestKind::fork, sid)).at("session_id");
      t.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count());
      svc->call(session_request(RequestKind::end_session, child));
    }
    std::nth_element(t.begin(), t.begin() + 15, t.end());
    return t[15];
  };
  const auto short_sid = start_session(*svc, "benchmark://tinyir-gen-v0/seed-5");
  svc->call(step_request(short_sid, {std::int64_t{0}}, {}));
  const auto long_sid = start_session(*svc, "benchmark://tinyir-gen-v0/seed-5");
  for (int i = 0; i < 10; ++i) {
    std::vector<Action> batch;
    for (int k = 0; k < 100; ++k) batch.push_back(std::int64_t{k % 6});
    svc->call(step_request(long_sid, batch, {}));
  }
  const double short_us = median_fork_us(short_sid);
  const double long_us = median_fork_us(long_sid);
  EXPECT_LE(long_us, 2 * short_us) << short_us << " vs " << long_us;
}

}  // namespace
}  // namespace optgym::rpc
