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

// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the named criteria. Exit status is the number of failures.

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "optgym/autotune/search.hpp"
#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/rng.hpp"
#include "optgym/datasets/datasets.hpp"
#include "optgym/env/env.hpp"
#include "optgym/gcc/spec.hpp"
#include "optgym/rest/server.hpp"
#include "optgym/rpc/service.hpp"
#include "optgym/rpc/wire.hpp"
#include "optgym/tdb/logging.hpp"
#include "optgym/tdb/store.hpp"
#include "optgym/tinyir/generator.hpp"
#include "optgym/tinyir/interpreter.hpp"
#include "optgym/tinyir/ir.hpp"
#include "optgym/tinyir/passes.hpp"

namespace {

using namespace optgym;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double geomean(const std::vector<double>& v) {
  double log_sum = 0;
  for (const double x : v) log_sum += std::log(x);
  return std::exp(log_sum / static_cast<double>(v.size()));
}

std::unique_ptr<Environment> tinyir_env(const std::string& benchmark, bool reward = true) {
  MakeOptions o;
  o.benchmark = benchmark;
  if (reward) o.reward_space = "InstructionCount";
  return make("tinyir-v0", o);
}

std::string gen(std::uint64_t seed) { return "benchmark://tinyir-gen-v0/seed-" + std::to_string(seed); }

void check_step(const StepReply& r) {
  if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
}

Outcome semantics() {
  const auto t0 = Clock::now();
  int failures = 0;
  int checks = 0;
  for (std::uint32_t seed = 0; seed < 1000; ++seed) {
    const tinyir::Program p = tinyir::generate(seed);
    Rng rng(seed);
    std::vector<std::vector<std::int64_t>> inputs(8);
    for (auto& in : inputs) {
      for (int i = 0; i < p.inputs_arity; ++i) in.push_back(rng.uniform_int(-1000, 1000));
    }
    std::vector<std::vector<std::int64_t>> expected;
    for (const auto& in : inputs) expected.push_back(tinyir::interpret(p, in));
    for (const tinyir::Pass pass : tinyir::kPassCatalog) {
      const tinyir::Program q = tinyir::run_pass(p, pass);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        ++checks;
        if (tinyir::interpret(q, inputs[k]) != expected[k]) ++failures;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 60, fmt("%d/%d output mismatches, %.1fs (limit 60s)", failures, checks, secs)};
}

Outcome replay() {
  const fs::path dir = fs::temp_directory_path() / ("optgym-accept-replay-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  Rng rng(11);
  int matches = 0;
  for (int episode = 0; episode < 100; ++episode) {
    auto env = tinyir_env(gen(static_cast<std::uint64_t>(episode)));
    env->reset();
    for (int i = 0; i < 50; ++i) check_step(env->step(Action{static_cast<std::int64_t>(rng.below(6))}));
    const fs::path file = dir / ("e" + std::to_string(episode) + ".json");
    env->state().save(file);
    const EnvState loaded = EnvState::load(file);
    auto restored = restore_state(loaded);
    if (restored->state_digest() == env->state_digest() &&
        std::abs(restored->cumulative_reward() - env->cumulative_reward()) <= 1e-9) {
      ++matches;
    }
  }
  fs::remove_all(dir);
  return {matches == 100, fmt("%d/100 restored episodes match digest and cumulative reward", matches)};
}

Outcome batching() {
  Rng rng(12);
  auto sequential = tinyir_env(gen(0), false);
  auto batched = tinyir_env(gen(0), false);
  int same = 0;
  int one_trip = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string benchmark = gen(1000 + static_cast<std::uint64_t>(i));
    std::vector<Action> actions;
    for (int k = 0; k < 20; ++k) actions.push_back(Action{static_cast<std::int64_t>(rng.below(6))});
    sequential->reset(benchmark);
    for (const auto& a : actions) check_step(sequential->step(a));
    batched->reset(benchmark);
    const auto before = batched->service().round_trips();
    check_step(batched->step(actions));
    one_trip += batched->service().round_trips() - before == 1 ? 1 : 0;
    same += sequential->state_digest() == batched->state_digest() ? 1 : 0;
  }
  return {same == 100 && one_trip == 100,
          fmt("%d/100 equal final digests, %d/100 batched calls took exactly 1 round trip", same, one_trip)};
}

Outcome amortized_init() {
  rpc::ServiceSpec spec;
  spec.backend = "tinyir";
  spec.config.cache_capacity = 8;
  auto svc = rpc::Service::start(spec);
  // Largest suite program, so parse work is as large as the corpus allows.
  std::string benchmark, content;
  std::int64_t largest = -1;
  for (const auto& uri : datasets().dataset("tinyir-suite-v0")->benchmarks()) {
    const std::string text = *datasets().load(uri).content;
    const auto n = tinyir::inst_count(tinyir::parse(text));
    if (n > largest) largest = n, benchmark = uri.str(), content = text;
  }
  const auto start = [&] {
    json r = rpc::make_request(rpc::RequestKind::start_session);
    r["benchmark"] = benchmark;
    r["action_space"] = "passes";
    r["content"] = content;
    const auto t0 = Clock::now();
    const auto sid = svc->call(r).at("session_id").get<std::uint64_t>();
    const double us = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
    json end = rpc::make_request(rpc::RequestKind::end_session);
    end["session_id"] = sid;
    svc->call(end);
    return us;
  };
  std::vector<double> cold, warm;
  for (int i = 0; i < 30; ++i) {
    svc->clear_cache();
    cold.push_back(start());
  }
  start();
  const auto hits_before = svc->stats().cache_hits;
  for (int i = 0; i < 30; ++i) warm.push_back(start());
  const auto hits = svc->stats().cache_hits - hits_before;
  const double ratio = median(warm) / median(cold);
  return {ratio <= 0.2, fmt("median warm %.1fus / cold %.1fus = %.2f (limit 0.20); %lld/30 warm calls were cache hits",
                            median(warm), median(cold), ratio, static_cast<long long>(hits))};
}

Outcome fault_tolerance() {
  MakeOptions o;
  o.reward_space = "InstructionCount";
  o.service.max_retries = 1000;  // 200 kills in one service lifetime
  const double limit = o.service.per_call_timeout + 10;
  Rng rng(13);
  auto env = make("tinyir-v0", o);
  int kills = 0, typed = 0, recovered = 0, hangs = 0;
  double slowest = 0;
  for (int episode = 0; episode < 20; ++episode) {
    const std::string benchmark = gen(500 + static_cast<std::uint64_t>(episode));
    env->reset(benchmark);
    std::set<int> points;
    while (points.size() < 10) points.insert(static_cast<int>(rng.below(40)));
    for (int step = 0; step < 40; ++step) {
      if (!points.count(step)) {
        check_step(env->step(Action{static_cast<std::int64_t>(rng.below(6))}));
        continue;
      }
      ++kills;
      ::kill(env->service().pid(), SIGKILL);
      const auto t0 = Clock::now();
      bool is_typed = false;
      try {
        const StepReply r = env->step(Action{static_cast<std::int64_t>(rng.below(6))});
        if (r.info.count("error")) {
          error_code_from_string(r.info.at("error"));
          is_typed = true;
        }
      } catch (const Error&) {
        is_typed = true;
      }
      const double secs = seconds_since(t0);
      slowest = std::max(slowest, secs);
      hangs += secs > limit ? 1 : 0;
      typed += is_typed ? 1 : 0;
      try {
        env->reset(benchmark);
        ++recovered;
      } catch (const Error&) {
      }
    }
  }
  return {typed == kills && recovered == kills && hangs == 0,
          fmt("%d kills: %d typed errors, %d resets recovered, %d hangs; slowest failing call %.3fs (limit %.0fs)",
              kills, typed, recovered, hangs, slowest, limit)};
}

// Exhaustive search over pass sequences up to `depth`, deduplicating states.
std::int64_t oracle_optimum(const tinyir::Program& start, int depth) {
  std::int64_t best = tinyir::inst_count(start);
  std::set<std::string> seen{tinyir::state_digest(start)};
  std::vector<tinyir::Program> frontier{start};
  for (int d = 0; d < depth; ++d) {
    std::vector<tinyir::Program> next;
    for (const auto& p : frontier) {
      for (const tinyir::Pass pass : tinyir::kPassCatalog) {
        tinyir::Program q = tinyir::run_pass(p, pass);
        if (!seen.insert(tinyir::state_digest(q)).second) continue;
        best = std::min(best, tinyir::inst_count(q));
        next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return best;
}

Outcome greedy_vs_oracle() {
  const json optima = json::parse(read_file(data_dir() / "tinyir-suite-v0" / "optima.json"));
  int greedy_ok = 0, programs = 0, oracle_disagree = 0, nonzero = 0, random_ok = 0;
  std::vector<std::string> greedy_misses, random_misses;
  for (const auto& uri : datasets().dataset("tinyir-suite-v0")->benchmarks()) {
    ++programs;
    const tinyir::Program p = tinyir::parse(*datasets().load(uri).content);
    const std::int64_t initial = tinyir::inst_count(p);
    const std::int64_t optimum = oracle_optimum(p, 6);
    const std::string name = fs::path(uri.str()).filename().string();
    if (optima.contains(name) && optima.at(name).at("optimum").get<std::int64_t>() != optimum) ++oracle_disagree;

    auto env = tinyir_env(uri.str());
    autotune::SearchBudget budget;
    budget.max_compilations = 1000;
    const auto g = autotune::greedy_search(*env, budget);
    const double oracle_gain = static_cast<double>(initial - optimum);
    const double greedy_gain = g.initial_metric - g.best_metric;
    if (greedy_gain >= 0.9 * oracle_gain) {
      ++greedy_ok;
    } else {
      greedy_misses.push_back(fmt("%s %g/%g", name.c_str(), greedy_gain, oracle_gain));
    }

    if (optimum == initial) continue;
    ++nonzero;
    int found = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      autotune::SearchBudget rb;
      rb.max_compilations = 10000;
      rb.patience = 10;
      const auto r = autotune::random_search(*env, rb, seed);
      found += r.best_metric < r.initial_metric ? 1 : 0;
    }
    if (found == 10) {
      ++random_ok;
    } else {
      random_misses.push_back(fmt("%s %d/10", name.c_str(), found));
    }
  }
  std::string misses;
  for (const auto& m : greedy_misses) misses += (misses.empty() ? "" : ", ") + m;
  for (const auto& m : random_misses) misses += "; random miss " + m;
  return {greedy_ok >= 16 && random_ok == nonzero && oracle_disagree == 0,
          fmt("greedy within 90%% of oracle on %d/%d programs (need 16); random search positive on %d/%d programs "
              "with a nonzero optimum, all 10 seeds; oracle disagrees with optima.json on %d. Greedy short of 90%%: %s",
              greedy_ok, programs, random_ok, nonzero, oracle_disagree, misses.c_str())};
}

Outcome gcc_extraction() {
  std::vector<fs::path> fixtures;
  for (const auto& e : fs::directory_iterator(fixture_dir())) {
    if (e.path().filename().string().rfind("gcc-", 0) == 0) fixtures.push_back(e.path());
  }
  std::sort(fixtures.begin(), fixtures.end());
  if (fixtures.empty()) return {false, "no gcc help fixture checked in"};
  const gcc::GccSpec fixture = gcc::spec_from_fixture(fixtures.back());
  const auto options = fixture.options.size();
  const auto actions = gcc::categorical_actions(fixture).size();
  const double log10 = gcc::space_size_log10(fixture);
  const double ln = gcc::space_size_ln(fixture);
  const bool fixture_ok = options == 502 && actions == 2281 && std::abs(log10 - 4461) <= 0.05 * 4461;

  bool live_ok = false;
  std::string live;
  try {
    const gcc::GccSpec spec = gcc::extract_space("gcc");
    std::int64_t formula = 0;
    for (const auto& o : spec.options) formula += gcc::action_count(o.settings());
    const auto n = static_cast<std::int64_t>(gcc::categorical_actions(spec).size());
    live_ok = spec.options.size() > 100 && n == formula;
    live = fmt("live %s: %zu options, %lld actions vs formula %lld", spec.version.c_str(), spec.options.size(),
               static_cast<long long>(n), static_cast<long long>(formula));
  } catch (const Error& e) {
    live = std::string("live gcc unavailable: ") + e.what();
  }
  return {fixture_ok && live_ok,
          fmt("fixture %s: %zu options (want 502), %zu actions (want 2281), log10 size %.1f (want 4461 +-5%%; ln size "
              "%.1f); %s",
              fixtures.back().filename().c_str(), options, actions, log10, ln, live.c_str())};
}

int gcc_major(const std::string& version) {
  std::istringstream in(version);
  std::string word, last;
  while (in >> word) {
    if (!word.empty() && std::isdigit(static_cast<unsigned char>(word[0])) && word.find('.') != std::string::npos) {
      last = word;
    }
  }
  return last.empty() ? 0 : std::stoi(last);
}

Outcome gcc_autotune() {
  gcc::GccSpec spec;
  try {
    spec = gcc::extract_space("gcc");
  } catch (const Error& e) {
    return {false, std::string("no local gcc: ") + e.what()};
  }
  if (gcc_major(spec.version) < 9) return {false, "local gcc is older than 9: " + spec.version};
  const auto t0 = Clock::now();
  autotune::SearchOptions options;
  options.population = 30;
  options.choice_cap = 256;
  options.initial_candidates = {gcc::parse_flags(spec, {"-Os"})};
  autotune::SearchBudget budget;
  budget.max_compilations = 300;

  std::vector<std::string> benchmarks;
  for (const auto& uri : datasets().dataset("csuite-v0")->benchmarks()) benchmarks.push_back(uri.str());
  MakeOptions o;
  o.compiler = "gcc";
  o.action_space = "choices";
  o.reward_space = "obj_size";
  auto env = make("gcc-v0", o);

  bool bands = true;
  int ga_wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::vector<double> random_gain, ga_gain;
    for (const auto& b : benchmarks) {
      env->reset(b);
      const auto r = autotune::random_search(*env, budget, seed, options);
      const auto g = autotune::genetic_algorithm(*env, budget, seed, options);
      random_gain.push_back(*r.baseline_metric / r.best_metric);
      ga_gain.push_back(*g.baseline_metric / g.best_metric);
    }
    const double rg = geomean(random_gain), gg = geomean(ga_gain);
    bands = bands && rg >= 1.0 && gg >= 1.0;
    ga_wins += gg >= rg ? 1 : 0;
    per_seed += fmt(" seed %llu: random %.4fx ga %.4fx;", static_cast<unsigned long long>(seed), rg, gg);
  }
  const double secs = seconds_since(t0);
  return {bands && ga_wins >= 2 && secs < 1800,
          fmt("%s, %zu files, 300 compilations each, choice cap 256, geomean vs -Os:%s GA >= random on %d/3 seeds; %.0fs (limit 1800s)",
              spec.version.c_str(), benchmarks.size(), per_seed.c_str(), ga_wins, secs)};
}

Outcome transition_db() {
  const fs::path dir = fs::temp_directory_path() / ("optgym-accept-tdb-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto store = std::make_shared<tdb::TransitionStore>(dir / "a.db");
  tdb::LoggingWrapper env(tinyir_env(gen(0)), store);
  Rng rng(14);
  for (int episode = 0; episode < 50; ++episode) {
    // Ten programs, so episodes share prefixes.
    env.reset(gen(static_cast<std::uint64_t>(episode % 10)));
    const auto steps = 5 + rng.below(16);
    for (std::uint64_t i = 0; i < steps; ++i) check_step(env.step(Action{static_cast<std::int64_t>(rng.below(6))}));
  }
  env.flush();
  const auto violations = store->integrity_violations();
  const auto first = store->dedup_transitions();
  const auto second = store->dedup_transitions();
  const auto after_dedup = store->integrity_violations();
  store->export_tsv(dir / "tsv");
  tdb::TransitionStore copy(dir / "b.db");
  copy.import_tsv(dir / "tsv");
  const bool same = copy.steps() == store->steps() && copy.observations() == store->observations() &&
                    copy.transitions() == store->transitions();
  const auto c = store->counts();
  fs::remove_all(dir);
  return {violations.empty() && after_dedup.empty() && first.created > 0 && second.created == 0 && same &&
              first.nondeterministic.empty(),
          fmt("%lld steps, %lld observations, %lld transitions; %zu integrity violations; dedup created %lld then %lld; "
              "%zu nondeterministic keys; export/import row sets %s",
              static_cast<long long>(c.steps), static_cast<long long>(c.observations),
              static_cast<long long>(c.transitions), violations.size() + after_dedup.size(),
              static_cast<long long>(first.created), static_cast<long long>(second.created),
              first.nondeterministic.size(), same ? "identical" : "differ")};
}

Outcome rest_parity() {
  rest::RestServer server;
  const int port = server.bind();
  std::thread thread([&] { server.serve(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);
  const auto post = [&](const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status >= 300) throw Error(ErrorCode::protocol_error, "HTTP request to " + path + " failed");
    return json::parse(res->body);
  };
  Rng rng(15);
  int matches = 0;
  std::string failure;
  try {
    auto env = tinyir_env(gen(0));
    std::map<std::string, std::string> sessions;
    for (int path = 0; path < 50; ++path) {
      const std::string benchmark = gen(static_cast<std::uint64_t>(path % 10));
      if (!sessions.count(benchmark)) {
        sessions[benchmark] = post("/api/v1/sessions", {{"env", "tinyir-v0"}, {"benchmark", benchmark}})
                                  .at("session_id")
                                  .get<std::string>();
      }
      env->reset(benchmark);
      std::int64_t node = 0;
      bool same = true;
      const auto length = 1 + rng.below(20);
      for (std::uint64_t i = 0; i < length; ++i) {
        const auto a = static_cast<std::int64_t>(rng.below(6));
        const json reply = post("/api/v1/sessions/" + sessions[benchmark] + "/nodes/" + std::to_string(node) + "/step",
                                {{"action", a}});
        check_step(env->step(Action{a}));
        node = reply.at("node").at("id");
        same = same && reply.at("node").at("digest") == env->state_digest();
      }
      matches += same ? 1 : 0;
    }
  } catch (const std::exception& e) {
    failure = std::string("; error: ") + e.what();
  }
  server.stop();
  thread.join();
  return {matches == 50, fmt("%d/50 HTTP paths match in-process digests%s", matches, failure.c_str())};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {"semantics-validation", semantics},
    {"replay-determinism", replay},
    {"batching-equivalence", batching},
    {"amortized-initialization", amortized_init},
    {"fault-tolerance", fault_tolerance},
    {"greedy-vs-oracle", greedy_vs_oracle},
    {"gcc-space-extraction", gcc_extraction},
    {"gcc-autotuning-band", gcc_autotune},
    {"transition-db-integrity", transition_db},
    {"rest-core-parity", rest_parity},
};

}  // namespace

int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    Outcome outcome;
    const auto t0 = Clock::now();
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %s (%.1fs): %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds_since(t0),
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
