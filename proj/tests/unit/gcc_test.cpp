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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/rng.hpp"
#include "optgym/common/subprocess.hpp"
#include "optgym/env/env.hpp"
#include "optgym/gcc/measure.hpp"
#include "optgym/gcc/spec.hpp"

namespace optgym::gcc {
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

fs::path fixture() { return fixture_dir() / "gcc-11.4.0"; }
std::string fake_gcc() { return (service_dir() / "fake-gcc").string(); }

// Expected (display name, settings) rows computed by an independent
// implementation of the extraction rules over the same fixture.
std::vector<std::pair<std::string, std::int64_t>> oracle_rows() {
  std::ifstream in(fixture() / "expected-options.tsv");
  std::vector<std::pair<std::string, std::int64_t>> rows;
  std::string name, settings;
  while (std::getline(in, name, '\t') && std::getline(in, settings)) rows.emplace_back(name, std::stoll(settings));
  return rows;
}

std::int64_t plain_size(const std::string& source, const std::vector<std::string>& flags, const char* mode) {
  const fs::path dir = fs::temp_directory_path() / ("optgym-gcc-test-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_file_atomic(dir / "input.c", source);  // the name is embedded in the output
  std::vector<std::string> argv{"gcc"};
  argv.insert(argv.end(), flags.begin(), flags.end());
  argv.insert(argv.end(), {"-w", mode, (dir / "input.c").string(), "-o", (dir / "out").string()});
  const RunResult r = run_process(argv);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const auto size = static_cast<std::int64_t>(fs::file_size(dir / "out"));
  fs::remove_all(dir);
  return size;
}

TEST(GccSpec, FixtureMatchesIndependentExtraction) {
  const GccSpec spec = spec_from_fixture(fixture());
  const auto rows = oracle_rows();
  ASSERT_EQ(spec.options.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(spec.options[i].display(), rows[i].first) << i;
    EXPECT_EQ(spec.options[i].settings(), rows[i].second) << rows[i].first;
  }
  EXPECT_EQ(spec.version, "gcc (Ubuntu 11.4.0-1ubuntu1~22.04.3) 11.4.0");
  EXPECT_EQ(spec.options.front().display(), "-O");
  EXPECT_EQ(spec.options.front().values, (std::vector<std::string>{"0", "1", "2", "3", "fast", "g", "s"}));
}

TEST(GccSpec, SnapshotIsByteStable) {
  GccSpec spec = spec_from_fixture(fixture());
  spec.compiler = "fixture:gcc-11.4.0";
  const std::string dump = spec.to_json().dump(2) + "\n";
  EXPECT_EQ(dump, read_file(fixture() / "spec.json"));
  EXPECT_EQ(GccSpec::from_json(spec.to_json()).options, spec.options);
}

TEST(GccSpec, SizeMatchesRecomputation) {
  const GccSpec spec = spec_from_fixture(fixture());
  double oracle = 0;
  for (const auto& [_, settings] : oracle_rows()) oracle += std::log10(static_cast<double>(settings + 1));
  EXPECT_NEAR(space_size_log10(spec), oracle, 1e-9);

  GccSpec one;
  Option flag;
  flag.name = "peel-loops";
  one.options = {flag};
  EXPECT_NEAR(space_size_log10(one), std::log10(3.0), 1e-12);
}

TEST(GccSpec, ActionCountMatchesFormula) {
  const GccSpec spec = spec_from_fixture(fixture());
  const auto actions = categorical_actions(spec);
  std::int64_t expected = 0;
  for (const auto& [_, settings] : oracle_rows()) {
    if (settings < 10) {
      expected += settings;
    } else {
      for (std::int64_t t : {10, 50, 500, 5000}) expected += settings >= t ? 2 : 0;
    }
  }
  EXPECT_EQ(static_cast<std::int64_t>(actions.size()), expected);
  std::set<std::string> names;
  for (const auto& a : actions) names.insert(a.name);
  EXPECT_EQ(names.size(), actions.size());
}

TEST(GccSpec, SmallOptionsGetSetActions) {
  GccSpec spec;
  Option flag;
  flag.name = "peel-loops";
  spec.options = {flag};
  const auto actions = categorical_actions(spec);
  ASSERT_EQ(actions.size(), 2u);
  EXPECT_EQ(actions[0].name, "-fpeel-loops");
  EXPECT_EQ(actions[1].name, "-fno-peel-loops");
  std::vector<std::int64_t> choices{0};
  apply(spec, actions[1], choices);
  EXPECT_EQ(choices[0], 2);
}

TEST(GccSpec, DeltaClampsAtBounds) {
  GccSpec spec;
  Option p;
  p.kind = OptionKind::param_int;
  p.name = "big";
  p.min = 0;
  p.max = 9999;
  spec.options = {p};
  const auto actions = categorical_actions(spec);
  ASSERT_EQ(actions.size(), 8u);
  auto by_name = [&](const std::string& n) {
    for (const auto& a : actions)
      if (a.name == n) return a;
    throw std::runtime_error(n);
  };
  std::vector<std::int64_t> choices{5};
  apply(spec, by_name("--param=big[-1000]"), choices);
  EXPECT_EQ(choices[0], 0);
  choices[0] = 9995;
  apply(spec, by_name("--param=big[+10]"), choices);
  EXPECT_EQ(choices[0], 10000);
  apply(spec, by_name("--param=big[-1]"), choices);
  EXPECT_EQ(choices[0], 9999);
}

TEST(GccSpec, CommandLineRoundTrip) {
  const GccSpec spec = spec_from_fixture(fixture());
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> choices(spec.options.size(), 0);
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (rng.next() % 4 == 0) choices[i] = static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(spec.options[i].cardinality()));
    }
    EXPECT_EQ(parse_flags(spec, render_flags(spec, choices)), choices);
  }
  EXPECT_TRUE(render_flags(spec, std::vector<std::int64_t>(spec.options.size(), 0)).empty());
  EXPECT_EQ(code_of([&] { parse_flags(spec, {"-fno-such-flag-at-all"}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { render_flags(spec, {1, 2}); }), ErrorCode::out_of_range_action);
}

TEST(GccSpec, ParsesParamForms) {
  const std::string help =
      "heading\n"
      "  --param=a=<1,9>  \t\t4\n"
      "  --param=b=  \t\t-1\n"
      "  --param=c=[x|y]  \t\tx\n"
      "  --param=lonely\n"
      "  d default 3 minimum 0 maximum 7\n";
  const auto params = parse_param_help(help);
  ASSERT_EQ(params.size(), 4u);
  EXPECT_EQ(params[0].settings(), 9);
  EXPECT_EQ(params[1].min, -1);
  EXPECT_EQ(params[1].max, std::int64_t{1} << 31);
  EXPECT_EQ(params[2].values, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(params[3].name, "d");
  EXPECT_EQ(params[3].settings(), 8);
}

TEST(GccSpec, ExtractionErrors) {
  EXPECT_EQ(code_of([] { extract_space("/no/such/gcc"); }), ErrorCode::compiler_not_found);
  ::setenv("FAKE_GCC_EMPTY", "1", 1);
  EXPECT_EQ(code_of([] { extract_space(fake_gcc()); }), ErrorCode::help_parse_empty);
  ::unsetenv("FAKE_GCC_EMPTY");
  const GccSpec toy = extract_space(fake_gcc());
  EXPECT_EQ(toy.options.size(), 3u);
  EXPECT_EQ(toy.version, "gcc (fake) 0.1.0");
}

TEST(GccSpec, LiveCompilerMatchesFixture) {
  const GccSpec fix = spec_from_fixture(fixture());
  const GccSpec live = extract_space("gcc");
  if (live.version != fix.version) GTEST_SKIP() << "local compiler is " << live.version;
  EXPECT_EQ(live.options, fix.options);
}

TEST(GccSpec, DockerCommand) {
  EXPECT_EQ(compiler_command("docker:gcc:11.2.0", {"--version"}),
            (std::vector<std::string>{"docker", "run", "--rm", "gcc:11.2.0", "gcc", "--version"}));
  EXPECT_EQ(compiler_command("docker:gcc:11.2.0", {"-c", "x.c"}, fs::path("/tmp/s")),
            (std::vector<std::string>{"docker", "run", "--rm", "-v", "/tmp/s:/tmp/s", "-w", "/tmp/s", "gcc:11.2.0",
                                      "gcc", "-c", "x.c"}));
  EXPECT_EQ(compiler_command("/usr/bin/gcc-11", {"-c"}), (std::vector<std::string>{"/usr/bin/gcc-11", "-c"}));
}

TEST(GccMeasure, AllAbsentIsPlainCompile) {
  const std::string src = read_file(data_dir() / "csuite-v0" / "crc32.c");
  Measurer m("gcc");
  EXPECT_EQ(m.measure({}, src, "crc32", SizeTarget::obj_size), plain_size(src, {}, "-c"));
  EXPECT_EQ(m.measure({}, src, "crc32", SizeTarget::asm_size), plain_size(src, {}, "-S"));
  EXPECT_EQ(m.measure({"-Os"}, src, "crc32", SizeTarget::obj_size), plain_size(src, {"-Os"}, "-c"));
}

TEST(GccMeasure, CacheAndDeterminism) {
  const std::string src = read_file(data_dir() / "csuite-v0" / "sieve.c");
  Measurer m("gcc");
  const auto first = m.measure({"-O2"}, src, "sieve", SizeTarget::obj_size);
  const auto calls = m.stats().invocations;
  EXPECT_EQ(m.measure({"-O2"}, src, "sieve", SizeTarget::obj_size), first);
  EXPECT_EQ(m.stats().invocations, calls);
  EXPECT_EQ(m.stats().hits, 1);

  Measurer fresh("gcc");
  EXPECT_EQ(fresh.measure({"-O2"}, src, "sieve", SizeTarget::obj_size), first);
}

TEST(GccMeasure, CompileErrorAndTimeout) {
  Measurer m(fake_gcc());
  EXPECT_EQ(m.measure({"-ftoy-a", "-ftoy-b=y", "--param=toy-c=3"}, "int x;", "s", SizeTarget::obj_size), 100);
  EXPECT_EQ(code_of([&] { m.measure({"-fno-toy-a", "--param=toy-c=5"}, "int x;", "s", SizeTarget::obj_size); }),
            ErrorCode::compile_error);
  // Failures are cached too.
  const auto calls = m.stats().invocations;
  EXPECT_EQ(code_of([&] { m.measure({"-fno-toy-a", "--param=toy-c=5"}, "int x;", "s", SizeTarget::obj_size); }),
            ErrorCode::compile_error);
  EXPECT_EQ(m.stats().invocations, calls);

  ::setenv("FAKE_GCC_SLEEP", "3", 1);
  Measurer slow(fake_gcc(), 1, std::chrono::seconds(1));
  EXPECT_EQ(code_of([&] { slow.measure({}, "int x;", "s", SizeTarget::obj_size); }), ErrorCode::compile_timeout);
  ::unsetenv("FAKE_GCC_SLEEP");
}

std::unique_ptr<Environment> gcc_env(const std::string& compiler, std::optional<std::string> reward,
                                     std::optional<std::string> obs = std::nullopt) {
  MakeOptions o;
  o.compiler = compiler;
  o.reward_space = std::move(reward);
  o.observation_space = std::move(obs);
  return make("gcc-v0", o);
}

std::int64_t action_index(const Environment& env, const std::string& name) {
  return std::get<std::int64_t>(action_from_name(env.action_space(), name));
}

TEST(GccEnv, ObjSizeRewardIsSizeDelta) {
  auto env = gcc_env("gcc", "obj_size", "obj_size");
  const auto initial = std::get<std::int64_t>(*env->reset());
  const std::string src = read_file(data_dir() / "csuite-v0" / "crc32.c");
  EXPECT_EQ(initial, plain_size(src, {}, "-c"));
  const StepReply r = env->step(Action{action_index(*env, "-Os")});
  const auto after = plain_size(src, {"-Os"}, "-c");
  EXPECT_EQ(std::get<std::int64_t>(r.observations.at(0)), after);
  EXPECT_DOUBLE_EQ(r.rewards.at(0), static_cast<double>(initial - after));
  EXPECT_GT(r.rewards.at(0), 0);
}

TEST(GccEnv, OsScaledReward) {
  auto env = gcc_env("gcc", "obj_size_os");
  env->reset("benchmark://csuite-v0/qsort");
  const std::string src = read_file(data_dir() / "csuite-v0" / "qsort.c");
  const double os = static_cast<double>(plain_size(src, {"-Os"}, "-c"));
  const double o0 = static_cast<double>(plain_size(src, {}, "-c"));
  const double o2 = static_cast<double>(plain_size(src, {"-O2"}, "-c"));
  const StepReply r = env->step(Action{action_index(*env, "-O2")});
  EXPECT_NEAR(r.rewards.at(0), (o0 - o2) / os, 1e-12);
}

TEST(GccEnv, ChoiceVectorActionsAndCommandLine) {
  MakeOptions o;
  o.compiler = fake_gcc();
  o.action_space = "choices";
  o.reward_space = "obj_size";
  o.benchmark = "benchmark://csuite-v0/fib";
  auto env = make("gcc-v0", o);
  EXPECT_EQ(env->action_space().kind, SpaceKind::integer_box);
  env->reset();
  const StepReply r = env->step({Action{std::vector<std::int64_t>{1, 2, 5}}},
                                std::vector<std::string>{"command_line", "obj_size", "choices"});
  EXPECT_EQ(std::get<std::string>(r.observations[0]), "-ftoy-a -ftoy-b=y --param=toy-c=4");
  EXPECT_EQ(std::get<std::int64_t>(r.observations[1]), 100 + 2 * 1);
  EXPECT_EQ(std::get<std::vector<std::int64_t>>(r.observations[2]), (std::vector<std::int64_t>{1, 2, 5}));
  EXPECT_EQ(code_of([&] { env->step(Action{std::vector<std::int64_t>{3, 0, 0}}); }), ErrorCode::out_of_range_action);
}

TEST(GccEnv, InvalidCombinationEndsEpisode) {
  auto env = gcc_env(fake_gcc(), "obj_size");
  env->reset();
  env->step(Action{action_index(*env, "-fno-toy-a")});
  const StepReply r = env->step(Action{action_index(*env, "--param=toy-c=5")});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.info.at("error"), "compile-error");
  EXPECT_EQ(code_of([&] { env->step(Action{0}); }), ErrorCode::episode_done);
  env->reset();
  EXPECT_FALSE(env->done());
}

TEST(GccEnv, ReplayReproducesDigest) {
  auto env = gcc_env(fake_gcc(), "obj_size");
  env->reset("benchmark://csuite-v0/adler32");
  for (const char* name : {"-ftoy-a", "-ftoy-b=z", "--param=toy-c=1", "-ftoy-b=y"}) {
    env->step(Action{action_index(*env, name)});
  }
  MakeOptions o;
  o.compiler = fake_gcc();
  auto restored = restore_state(env->state(), o);
  EXPECT_EQ(restored->state_digest(), env->state_digest());
  EXPECT_NEAR(restored->cumulative_reward(), env->cumulative_reward(), 1e-9);
}

}  // namespace
}  // namespace optgym::gcc
