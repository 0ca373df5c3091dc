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
#include <set>

#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/rng.hpp"
#include "optgym/tdb/logging.hpp"
#include "optgym/tdb/store.hpp"

namespace optgym::tdb {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an optgym::Error";
  return ErrorCode::protocol_error;
}

class TdbTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("optgym-tdb-test-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    store_ = std::make_shared<TransitionStore>(dir_ / "store.db");
  }
  void TearDown() override {
    store_.reset();
    fs::remove_all(dir_);
  }

  std::unique_ptr<LoggingWrapper> logged(const std::string& benchmark = "benchmark://tinyir-gen-v0/seed-3") {
    MakeOptions o;
    o.benchmark = benchmark;
    o.reward_space = "InstructionCount";
    return std::make_unique<LoggingWrapper>(make("tinyir-v0", o), store_);
  }

  std::int64_t pass(const Environment& env, const std::string& name) {
    return std::get<std::int64_t>(action_from_name(env.action_space(), name));
  }

  fs::path dir_;
  std::shared_ptr<TransitionStore> store_;
};

TEST(Actions, SplitRespectsBrackets) {
  EXPECT_EQ(split_actions(""), std::vector<std::string>{});
  EXPECT_EQ(split_actions("dce,cse"), (std::vector<std::string>{"dce", "cse"}));
  EXPECT_EQ(split_actions("[1,0,2],--param=x[+10],-O2"),
            (std::vector<std::string>{"[1,0,2]", "--param=x[+10]", "-O2"}));
  EXPECT_EQ(join_actions(split_actions("[1,0,2],dce")), "[1,0,2],dce");
}

TEST_F(TdbTest, UnwritableStore) {
  EXPECT_EQ(code_of([&] { TransitionStore(dir_ / "missing" / "dir" / "s.db"); }), ErrorCode::store_unwritable);
  std::ofstream(dir_ / "ro.db").close();
  fs::permissions(dir_ / "ro.db", fs::perms::owner_read);
  if (::geteuid() != 0) {
    EXPECT_EQ(code_of([&] { TransitionStore(dir_ / "ro.db"); }), ErrorCode::store_unwritable);
  }
}

TEST_F(TdbTest, EpisodeRowsAreDeduplicatedOnConflict) {
  auto env = logged();
  env->reset();
  Rng rng(9);
  std::set<std::string> prefixes{""};
  for (int i = 0; i < 100; ++i) {
    env->step(Action{static_cast<std::int64_t>(rng.below(6))});
    prefixes.insert(join_actions(env->actions()));
  }
  env->flush();
  const RowCounts n = store_->counts();
  EXPECT_EQ(n.steps, 101);
  EXPECT_EQ(n.steps, static_cast<std::int64_t>(prefixes.size()));
  env->reset();
  for (int i = 0; i < 10; ++i) env->step(Action{static_cast<std::int64_t>(0)});
  env->flush();
  EXPECT_LE(store_->counts().steps, 111);
  EXPECT_TRUE(store_->integrity_violations().empty());
  EXPECT_EQ(store_->dropped(), 0);
}

TEST_F(TdbTest, ObservationsMatchTheEnvironment) {
  auto env = logged();
  env->reset();
  const StepReply r = env->step({Action{pass(*env, "dce")}}, std::vector<std::string>{"Ir", "InstCount"});
  ASSERT_EQ(r.observations.size(), 2u);  // the logging columns are stripped
  env->flush();
  bool found = false;
  for (const auto& row : store_->observations()) {
    if (row.state_digest != env->state_digest()) continue;
    found = true;
    EXPECT_EQ(row.ir_text, std::get<std::string>(r.observations[0]));
    EXPECT_EQ(row.instcount, std::get<std::int64_t>(r.observations[1]));
  }
  EXPECT_TRUE(found);
}

TEST_F(TdbTest, SharedPrefixesStoredOnce) {
  auto env = logged();
  const std::vector<std::string> a{"constfold", "dce", "cse", "copyprop"};
  const std::vector<std::string> b{"constfold", "dce", "strength-reduce", "canonicalize", "dce"};
  std::set<std::string> expected{""};
  for (const auto* seq : {&a, &b}) {
    env->reset();
    for (const auto& name : *seq) {
      env->step(Action{pass(*env, name)});
      expected.insert(join_actions(env->actions()));
    }
  }
  env->flush();
  EXPECT_EQ(expected.size(), 1u + 4u + 3u);
  EXPECT_EQ(store_->counts().steps, static_cast<std::int64_t>(expected.size()));
}

TEST_F(TdbTest, FlushMakesRowsVisible) {
  auto env = logged();
  for (int e = 0; e < 5; ++e) {
    env->reset();
    for (int i = 0; i < 20; ++i) env->step(Action{static_cast<std::int64_t>((i * 7 + e) % 6)});
    env->flush();
    const auto rows = store_->steps();
    const std::string last = join_actions(env->actions());
    EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [&](const StepsRow& r) { return r.actions == last; }));
  }
}

TEST_F(TdbTest, ChainOfFiveSteps) {
  auto env = logged();
  env->reset();
  for (const char* name : {"constfold", "cse", "dce", "copyprop", "canonicalize"}) env->step(Action{pass(*env, name)});
  env->flush();
  const DedupResult first = store_->dedup_transitions();
  EXPECT_EQ(first.created, 5);
  EXPECT_TRUE(first.nondeterministic.empty());
  EXPECT_EQ(store_->dedup_transitions().created, 0);
}

TEST_F(TdbTest, DivergingEpisodesShareTransitions) {
  auto env = logged();
  // Expected (from, action, to) triples recorded from the environment itself.
  std::set<std::tuple<std::string, std::string, std::string>> expected;
  std::map<std::string, std::int64_t> instcount;
  for (const auto& seq : std::vector<std::vector<std::string>>{{"constfold", "dce", "cse", "copyprop"},
                                                                {"constfold", "dce", "canonicalize", "dce"}}) {
    env->reset();
    instcount[env->state_digest()] =
        std::get<std::int64_t>(env->step({}, std::vector<std::string>{"InstCount"}).observations[0]);
    for (const auto& name : seq) {
      const std::string from = env->state_digest();
      const StepReply r = env->step({Action{pass(*env, name)}}, std::vector<std::string>{"InstCount"});
      instcount[env->state_digest()] = std::get<std::int64_t>(r.observations[0]);
      expected.insert({from, name, env->state_digest()});
    }
  }
  env->flush();
  const DedupResult d = store_->dedup_transitions();
  EXPECT_EQ(d.created, static_cast<std::int64_t>(expected.size()));
  std::set<std::tuple<std::string, std::string, std::string>> got;
  for (const auto& t : store_->transitions()) {
    got.insert({t.from_digest, t.action, t.to_digest});
    EXPECT_EQ(t.reward, static_cast<double>(instcount.at(t.from_digest) - instcount.at(t.to_digest)));
  }
  EXPECT_EQ(got, expected);
  EXPECT_EQ(store_->dedup_transitions().created, 0);
}

TEST_F(TdbTest, NondeterminismIsReported) {
  const std::string d0(64, '0'), d1(64, '1'), d2(64, '2');
  store_->insert({{"benchmark://x-v0/a", "", d0},
                  {"benchmark://x-v0/a", "dce", d1},
                  {"benchmark://x-v0/b", "", d0},
                  {"benchmark://x-v0/b", "dce", d2}},
                 {{d0, 3, {}, ""}, {d1, 2, {}, ""}, {d2, 1, {}, ""}});
  const DedupResult d = store_->dedup_transitions();
  EXPECT_EQ(d.created, 1);
  ASSERT_EQ(d.nondeterministic.size(), 1u);
  EXPECT_EQ(d.nondeterministic[0], d0 + " dce");
}

TEST_F(TdbTest, IntegrityViolationsAreFound) {
  store_->insert({{"benchmark://x-v0/a", "", std::string(64, 'a')}}, {},
                 {{std::string(64, 'b'), "dce", std::string(64, 'c'), 1.0}});
  EXPECT_EQ(store_->integrity_violations().size(), 3u);
}

TEST_F(TdbTest, EmptyExportHasHeadersOnly) {
  const RowCounts n = store_->export_tsv(dir_ / "out");
  EXPECT_EQ(n, RowCounts{});
  EXPECT_EQ(read_file(dir_ / "out" / "steps.tsv"), "benchmark\tactions\tstate_digest\n");
  EXPECT_EQ(read_file(dir_ / "out" / "observations.tsv"), "state_digest\tinstcount\topcode_histogram\tir_base64\n");
  EXPECT_EQ(read_file(dir_ / "out" / "transitions.tsv"), "from_digest\taction\tto_digest\treward\n");
}

TEST_F(TdbTest, ExportImportRoundTrip) {
  auto env = logged();
  Rng rng(4);
  for (int e = 0; e < 10; ++e) {
    env->reset("benchmark://tinyir-gen-v0/seed-" + std::to_string(e % 4));
    for (int i = 0; i < 8; ++i) env->step(Action{static_cast<std::int64_t>(rng.below(6))});
  }
  env->flush();
  const DedupResult d = store_->dedup_transitions();
  const RowCounts exported = store_->export_tsv(dir_ / "out");
  EXPECT_EQ(exported.transitions, d.created);
  EXPECT_EQ(exported, store_->counts());

  TransitionStore copy(dir_ / "copy.db");
  EXPECT_EQ(copy.import_tsv(dir_ / "out"), exported);
  EXPECT_EQ(copy.steps(), store_->steps());
  EXPECT_EQ(copy.observations(), store_->observations());
  EXPECT_EQ(copy.transitions(), store_->transitions());
  EXPECT_EQ(copy.import_tsv(dir_ / "out"), RowCounts{});
}

TEST_F(TdbTest, MalformedImportFails) {
  store_->export_tsv(dir_ / "out");
  std::ofstream(dir_ / "out" / "steps.tsv", std::ios::app) << "only\ttwo\n";
  EXPECT_EQ(code_of([&] { store_->import_tsv(dir_ / "out"); }), ErrorCode::io_failure);
}

TEST_F(TdbTest, LoggingDoesNotPerturbRewards) {
  MakeOptions o;
  o.benchmark = "benchmark://tinyir-gen-v0/seed-5";
  o.reward_space = "InstructionCount";
  auto plain = make("tinyir-v0", o);
  auto env = logged("benchmark://tinyir-gen-v0/seed-5");
  plain->reset();
  env->reset();
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    const Action a{static_cast<std::int64_t>(rng.below(6))};
    EXPECT_EQ(plain->step(a).rewards, env->step(a).rewards);
  }
  EXPECT_EQ(plain->cumulative_reward(), env->cumulative_reward());
  EXPECT_EQ(plain->state_digest(), env->state_digest());
}

TEST_F(TdbTest, ForkKeepsLogging) {
  auto env = logged();
  env->reset();
  auto forked = env->fork();
  forked->step(Action{pass(*env, "dce")});
  env->flush();
  const auto rows = store_->steps();
  EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [](const StepsRow& r) { return r.actions == "dce"; }));
}

TEST_F(TdbTest, FullQueueDropsWithoutBlocking) {
  TransitionStore tiny(dir_ / "tiny.db", 1);
  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    accepted += tiny.enqueue({"benchmark://x-v0/a", std::to_string(i), std::string(64, 'a')},
                             ObservationsRow{std::string(64, 'a'), 1, {}, ""});
  }
  tiny.flush();
  EXPECT_GT(tiny.dropped(), 0);
  EXPECT_EQ(tiny.dropped() + accepted, 2000);
  EXPECT_EQ(tiny.counts().steps, accepted);
}

}  // namespace
}  // namespace optgym::tdb
