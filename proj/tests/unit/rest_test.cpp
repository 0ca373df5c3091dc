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

#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/rng.hpp"
#include "optgym/datasets/datasets.hpp"
#include "optgym/rest/server.hpp"
#include "optgym/tinyir/generator.hpp"
#include "optgym/tinyir/ir.hpp"

namespace optgym::rest {
namespace {

using json = nlohmann::json;

constexpr char kThreeDead[] =
    "inputs 1\n"
    "r0 = input 0\n"
    "r1 = const 7\n"
    "r2 = add r0, r0\n"
    "r3 = mul r1, r0\n"
    "r4 = id r3\n"
    "output r2\n";

struct Reply {
  int status = 0;
  json body;
};

class Harness {
 public:
  explicit Harness(ServerConfig config = {}) : server_(std::move(config)) {
    port_ = server_.bind();
    thread_ = std::thread([this] { server_.serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  ~Harness() {
    server_.stop();
    thread_.join();
  }

  Reply post(const std::string& path, const json& body) { return wrap(client_->Post(path, body.dump(), "application/json")); }
  Reply get(const std::string& path) { return wrap(client_->Get(path)); }
  Reply del(const std::string& path) { return wrap(client_->Delete(path)); }
  std::string raw(const std::string& path) {
    auto res = client_->Get(path);
    return res ? res->body : "";
  }

  std::string create(const std::string& benchmark) {
    const Reply r = post("/api/v1/sessions", {{"env", "tinyir-v0"}, {"benchmark", benchmark}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body.at("session_id");
  }
  Reply step(const std::string& session, std::int64_t node, const json& action) {
    return post("/api/v1/sessions/" + session + "/nodes/" + std::to_string(node) + "/step", {{"action", action}});
  }

  RestServer& server() { return server_; }
  int port() const { return port_; }

 private:
  static Reply wrap(const httplib::Result& res) {
    if (!res) return {0, nullptr};
    return {res->status, res->body.empty() ? json(nullptr) : json::parse(res->body)};
  }

  RestServer server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

class RestTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("optgym-rest-test-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    std::ofstream(dir_ / "three_dead.tir") << kThreeDead;
    datasets().add_local_dataset(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static inline fs::path dir_;
};

TEST_F(RestTest, CreateSessionReportsGeneratorCount) {
  Harness h;
  const Reply r = h.post("/api/v1/sessions", {{"env", "tinyir-v0"}, {"benchmark", "benchmark://tinyir-gen-v0/seed-1"}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body.at("root_node").at("instcount"), tinyir::inst_count(tinyir::generate(1)));
  EXPECT_EQ(r.body.at("root_node").at("cumulative_reward"), 0.0);
  EXPECT_EQ(r.body.at("action_space").at("n"), 6);
  EXPECT_FALSE(r.body.at("observation_spaces").empty());
}

TEST_F(RestTest, CreateErrors) {
  Harness h;
  Reply r = h.post("/api/v1/sessions", {{"env", "tinyir-v0"}, {"benchmark", "benchmark://tinyir-suite-v0/nope"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("code"), "unknown-benchmark");
  r = h.post("/api/v1/sessions", {{"env", "nope-v0"}, {"benchmark", "benchmark://tinyir-gen-v0/seed-1"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("code"), "unknown-environment");
  r = h.post("/api/v1/sessions", {{"env", 3}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("code"), "invalid-argument");
}

TEST_F(RestTest, SessionCap) {
  EXPECT_EQ(SessionConfig{}.max_sessions, 1000u);
  ServerConfig config;
  config.sessions.max_sessions = 2;
  Harness h(config);
  h.create("benchmark://tinyir-gen-v0/seed-1");
  h.create("benchmark://tinyir-gen-v0/seed-2");
  const Reply r = h.post("/api/v1/sessions", {{"env", "tinyir-v0"}, {"benchmark", "benchmark://tinyir-gen-v0/seed-3"}});
  EXPECT_EQ(r.status, 429);
  EXPECT_EQ(r.body.at("code"), "session-cap-exceeded");
}

TEST_F(RestTest, StepDceOnThreeDeadProgram) {
  Harness h;
  const std::string s = h.create("benchmark://user-v0/three_dead.tir");
  const Reply r = h.step(s, 0, "dce");
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body.at("node").at("reward"), 3.0);
  EXPECT_EQ(r.body.at("node").at("parent"), 0);
  EXPECT_EQ(r.body.at("node").at("action"), "dce");
  EXPECT_FALSE(r.body.at("duplicate"));
}

TEST_F(RestTest, SameStepTwiceIsFlaggedDuplicate) {
  Harness h;
  const std::string s = h.create("benchmark://user-v0/three_dead.tir");
  const Reply a = h.step(s, 0, "dce");
  const Reply b = h.step(s, 0, "dce");
  EXPECT_NE(a.body.at("node").at("id"), b.body.at("node").at("id"));
  EXPECT_EQ(a.body.at("node").at("digest"), b.body.at("node").at("digest"));
  EXPECT_TRUE(b.body.at("duplicate"));
  EXPECT_EQ(b.body.at("duplicate_of"), a.body.at("node").at("id"));
}

TEST_F(RestTest, StepErrors) {
  Harness h;
  const std::string s = h.create("benchmark://tinyir-gen-v0/seed-1");
  EXPECT_EQ(h.step(s, 7, "dce").status, 404);
  EXPECT_EQ(h.post("/api/v1/sessions/" + s + "/nodes/x/step", {{"action", "dce"}}).status, 404);
  Reply r = h.step(s, 0, "no-such-pass");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("code"), "out-of-range-action");
  EXPECT_EQ(h.step(s, 0, 99).status, 400);
  EXPECT_EQ(h.step("0000", 0, "dce").status, 404);
  EXPECT_EQ(h.get("/api/v1/sessions/" + s + "/nodes/0/series?metric=bogus").status, 400);
}

TEST_F(RestTest, ExpiredSessionIsGone) {
  auto now = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
  ServerConfig config;
  config.sessions.idle_ttl = std::chrono::minutes(30);
  config.sessions.now = [now] { return *now; };
  Harness h(config);
  const std::string s = h.create("benchmark://tinyir-gen-v0/seed-1");
  *now += std::chrono::minutes(29);
  EXPECT_EQ(h.step(s, 0, "dce").status, 201);
  *now += std::chrono::minutes(31);
  const Reply r = h.step(s, 0, "dce");
  EXPECT_EQ(r.status, 410);
  EXPECT_EQ(r.body.at("code"), "session-expired");
  EXPECT_EQ(h.get("/api/v1/sessions/" + s + "/tree").status, 410);
  EXPECT_EQ(h.server().sessions().size(), 0u);
}

TEST_F(RestTest, TreeAndSeries) {
  Harness h;
  const std::string s = h.create("benchmark://tinyir-gen-v0/seed-4");
  std::int64_t node = 0;
  for (const char* a : {"constfold", "dce", "cse"}) node = h.step(s, node, a).body.at("node").at("id");
  const Reply tree = h.get("/api/v1/sessions/" + s + "/tree");
  ASSERT_EQ(tree.status, 200);
  EXPECT_EQ(tree.body.at("nodes").size(), 4u);
  EXPECT_EQ(tree.body.at("root"), 0);
  const Reply series = h.get("/api/v1/sessions/" + s + "/nodes/" + std::to_string(node) + "/series?metric=cumulative_reward");
  ASSERT_EQ(series.status, 200);
  const auto values = series.body.at("values").get<std::vector<double>>();
  ASSERT_EQ(values.size(), 4u);
  EXPECT_EQ(values[0], 0.0);
  const auto& nodes = tree.body.at("nodes");
  for (const auto& [id, n] : nodes.items()) {
    if (n.at("parent").is_null()) continue;
    const auto& parent = nodes.at(std::to_string(n.at("parent").get<int>()));
    EXPECT_NEAR(n.at("cumulative_reward").get<double>(),
                parent.at("cumulative_reward").get<double>() + n.at("reward").get<double>(), 1e-9);
  }
}

TEST_F(RestTest, InstcountSeriesNonincreasingForDceCsePaths) {
  Harness h;
  Rng rng(3);
  for (int seed = 0; seed < 10; ++seed) {
    const std::string s = h.create("benchmark://tinyir-gen-v0/seed-" + std::to_string(seed));
    std::int64_t node = 0;
    for (int i = 0; i < 8; ++i) node = h.step(s, node, rng.below(2) ? "dce" : "cse").body.at("node").at("id");
    const auto values =
        h.get("/api/v1/sessions/" + s + "/nodes/" + std::to_string(node) + "/series?metric=instcount")
            .body.at("values")
            .get<std::vector<double>>();
    ASSERT_EQ(values.size(), 9u);
    for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LE(values[i], values[i - 1]);
  }
}

TEST_F(RestTest, ReadsDoNotMutateAndNodesAreImmutable) {
  Harness h;
  const std::string s = h.create("benchmark://tinyir-gen-v0/seed-5");
  h.step(s, 0, "constfold");
  h.step(s, 1, "dce");
  const std::string before = h.raw("/api/v1/sessions/" + s + "/tree");
  h.get("/api/v1/sessions/" + s + "/nodes/2/series?metric=instcount");
  h.get("/api/v1/sessions/" + s + "/tree");
  EXPECT_EQ(sha256_hex(h.raw("/api/v1/sessions/" + s + "/tree")), sha256_hex(before));
  // Branch from the root and from an interior node.
  h.step(s, 0, "cse");
  h.step(s, 1, "canonicalize");
  const json after = json::parse(h.raw("/api/v1/sessions/" + s + "/tree")).at("nodes");
  for (const auto& [id, n] : json::parse(before).at("nodes").items()) EXPECT_EQ(after.at(id), n);
  EXPECT_EQ(after.size(), 5u);
}

TEST_F(RestTest, HttpPathsMatchInProcessDigests) {
  Harness h;
  Rng rng(2024);
  MakeOptions o;
  o.reward_space = "InstructionCount";
  auto env = make("tinyir-v0", o);
  int matches = 0;
  std::map<std::string, std::string> session_of;
  for (int path = 0; path < 50; ++path) {
    const std::string benchmark = "benchmark://tinyir-gen-v0/seed-" + std::to_string(path % 5);
    if (!session_of.count(benchmark)) session_of[benchmark] = h.create(benchmark);
    const std::string s = session_of[benchmark];
    env->reset(benchmark);
    std::int64_t node = 0;
    bool same = true;
    const auto length = 1 + rng.below(10);
    for (std::uint64_t i = 0; i < length; ++i) {
      const auto a = static_cast<std::int64_t>(rng.below(6));
      const Reply r = h.step(s, node, a);
      env->step(Action{a});
      node = r.body.at("node").at("id");
      same = same && r.body.at("node").at("digest") == env->state_digest() &&
             std::abs(r.body.at("node").at("cumulative_reward").get<double>() - env->cumulative_reward()) < 1e-9;
    }
    matches += same ? 1 : 0;
  }
  EXPECT_EQ(matches, 50);
}

TEST_F(RestTest, DeleteAndDatasets) {
  Harness h;
  const std::string s = h.create("benchmark://tinyir-gen-v0/seed-1");
  EXPECT_EQ(h.del("/api/v1/sessions/" + s).status, 200);
  EXPECT_EQ(h.get("/api/v1/sessions/" + s + "/tree").status, 404);
  const Reply d = h.get("/api/v1/datasets");
  ASSERT_EQ(d.status, 200);
  bool suite = false;
  for (const auto& entry : d.body) suite = suite || entry.at("name") == "tinyir-suite-v0";
  EXPECT_TRUE(suite);
}

TEST_F(RestTest, ConcurrentSessions) {
  Harness h;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(h.create("benchmark://tinyir-gen-v0/seed-" + std::to_string(i)));
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (const auto& id : ids) {
    threads.emplace_back([&, id] {
      httplib::Client c("127.0.0.1", h.port());
      for (int i = 0; i < 10; ++i) {
        const json body = {{"action", i % 6}};
        auto res = c.Post("/api/v1/sessions/" + id + "/nodes/" + std::to_string(i) + "/step", body.dump(), "application/json");
        if (res && res->status == 201) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 40);
}

TEST_F(RestTest, ServesStaticAssets) {
  const fs::path assets = dir_ / "static";
  fs::create_directories(assets);
  std::ofstream(assets / "index.html") << "<html>explorer</html>";
  ServerConfig config;
  config.static_dir = assets;
  Harness h(config);
  EXPECT_EQ(h.raw("/index.html"), "<html>explorer</html>");
}

}  // namespace
}  // namespace optgym::rest
