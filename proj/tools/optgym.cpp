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

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "optgym/autotune/search.hpp"
#include "optgym/common/error.hpp"
#include "optgym/datasets/datasets.hpp"
#include "optgym/env/env.hpp"
#include "optgym/env/registry.hpp"
#include "optgym/gcc/spec.hpp"
#include "optgym/rest/server.hpp"
#include "optgym/tdb/store.hpp"

namespace {

using namespace optgym;

std::string default_reward(const std::string& env_id) {
  return env_spec(env_id).backend == "gcc" ? "obj_size" : "InstructionCount";
}

MakeOptions base_options(const std::string& compiler) {
  MakeOptions o;
  if (!compiler.empty()) o.compiler = compiler;
  return o;
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

constexpr char kShellHelp[] =
    "commands:\n"
    "  help                  this text\n"
    "  actions               list the action space\n"
    "  spaces                list observation and reward spaces\n"
    "  step <action>...      apply actions by name or index, in one batch\n"
    "  obs <space>           print an observation of the current state\n"
    "  reward <space>        print a reward for the last step\n"
    "  reset [benchmark]     start a new episode\n"
    "  state                 print the episode state as JSON\n"
    "  save <path>           write the episode state file\n"
    "  quit                  leave the shell\n";

void describe_space(std::ostream& out, const SpaceDescriptor& s) {
  out << "  " << s.id;
  if (!s.display_name.empty() && s.display_name != s.id) out << " (" << s.display_name << ")";
  out << "\n";
}

int run_shell(const std::string& env_id, const std::string& benchmark, const std::string& compiler) {
  MakeOptions o = base_options(compiler);
  if (!benchmark.empty()) o.benchmark = benchmark;
  o.reward_space = default_reward(env_id);
  auto env = make(env_id, o);
  env->reset();
  std::cout << env_id << " on " << env->benchmark() << ". Type 'help' for commands.\n";
  std::string line;
  while (std::cout << "optgym> " << std::flush, std::getline(std::cin, line)) {
    const auto words = split_words(line);
    if (words.empty()) continue;
    const std::string& cmd = words[0];
    try {
      if (cmd == "quit" || cmd == "exit") break;
      if (cmd == "help") {
        std::cout << kShellHelp;
      } else if (cmd == "actions") {
        const auto& space = env->action_space();
        if (space.kind == SpaceKind::discrete) {
          for (std::int64_t i = 0; i < space.n; ++i) std::cout << "  " << i << " " << action_name(space, Action{i}) << "\n";
        } else {
          std::cout << "  " << space.id << ": vector of " << space.lower.size() << " integers\n";
        }
      } else if (cmd == "spaces") {
        std::cout << "observations:\n";
        for (const auto& s : env->observation_spaces()) describe_space(std::cout, s);
        std::cout << "rewards:\n";
        for (const auto& s : env->reward_spaces()) describe_space(std::cout, s);
      } else if (cmd == "step") {
        std::vector<Action> actions;
        for (std::size_t i = 1; i < words.size(); ++i) {
          const bool index = words[i].find_first_not_of("0123456789") == std::string::npos;
          actions.push_back(index ? Action{std::stoll(words[i])} : action_from_name(env->action_space(), words[i]));
        }
        const StepReply r = env->step(actions);
        if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
        std::cout << "reward " << (r.rewards.empty() ? 0.0 : r.rewards[0]) << "  cumulative "
                  << env->cumulative_reward() << (r.done ? "  done" : "") << "\n";
      } else if (cmd == "obs" && words.size() == 2) {
        const StepReply r = env->step({}, std::vector<std::string>{words[1]}, std::vector<std::string>{});
        if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
        std::cout << observation_to_string(r.observations.at(0)) << "\n";
      } else if (cmd == "reward" && words.size() == 2) {
        const StepReply r = env->step({}, std::vector<std::string>{}, std::vector<std::string>{words[1]});
        if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
        std::cout << r.rewards.at(0) << "\n";
      } else if (cmd == "reset") {
        env->reset(words.size() > 1 ? std::optional<std::string>(words[1]) : std::nullopt);
        std::cout << "episode " << env->episode() << " on " << env->benchmark() << "\n";
      } else if (cmd == "state") {
        std::cout << env->state().to_json().dump(2) << "\n";
      } else if (cmd == "save" && words.size() == 2) {
        env->state().save(words[1]);
      } else {
        std::cout << "unknown command; type 'help'\n";
      }
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

int run_replay(const std::string& path, const std::string& compiler, bool quiet) {
  const EnvState state = EnvState::load(path);
  MakeOptions o = base_options(compiler);
  o.benchmark = state.benchmark;
  if (!state.reward_space_id.empty()) o.reward_space = state.reward_space_id;
  auto env = make(state.env_id, o);
  env->reset();
  for (std::size_t i = 0; i < state.actions.size(); ++i) {
    const StepReply r = env->step(action_from_name(env->action_space(), state.actions[i]));
    if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
    if (!quiet) {
      std::printf("%4zu %-24s reward %-12g cumulative %-12g %s\n", i + 1, state.actions[i].c_str(),
                  r.rewards.empty() ? 0.0 : r.rewards[0], env->cumulative_reward(), env->state_digest().c_str());
    }
  }
  if (env->state_digest() != state.state_digest) {
    std::fprintf(stderr, "digest-mismatch: replay reached %s, file records %s\n", env->state_digest().c_str(),
                 state.state_digest.c_str());
    return 1;
  }
  std::printf("ok: %zu actions, cumulative reward %g, digest %s\n", state.actions.size(), env->cumulative_reward(),
              env->state_digest().c_str());
  return 0;
}

int run_validate(const std::string& path, const std::string& compiler) {
  const EnvState state = EnvState::load(path);
  MakeOptions o = base_options(compiler);
  try {
    auto env = restore_state(state, o);
    std::printf("ok: %s\n", env->state_digest().c_str());
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::digest_mismatch) throw;
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}

int run_gcc_space(const std::string& compiler, const std::string& fixture, bool dump) {
  const gcc::GccSpec spec = fixture.empty() ? gcc::extract_space(compiler) : gcc::spec_from_fixture(fixture);
  if (dump) {
    std::cout << spec.to_json().dump(2) << "\n";
    return 0;
  }
  std::printf("compiler   %s\nversion    %s\noptions    %zu\nactions    %zu\nlog10 size %.1f\n",
              spec.compiler.c_str(), spec.version.c_str(), spec.options.size(),
              gcc::categorical_actions(spec).size(), gcc::space_size_log10(spec));
  return 0;
}

int run_search(const std::string& env_id, const std::string& benchmark, const std::string& technique,
               std::optional<double> seconds, std::optional<std::int64_t> evals, std::optional<std::int64_t> patience,
               std::uint64_t seed, const std::string& out, const std::string& compiler, std::string action_space,
               std::optional<std::int64_t> choice_cap) {
  MakeOptions o = base_options(compiler);
  o.benchmark = benchmark;
  o.reward_space = default_reward(env_id);
  if (action_space.empty() && env_spec(env_id).backend == "gcc") {
    action_space = technique == "greedy" ? "categorical" : "choices";
  }
  if (!action_space.empty()) o.action_space = action_space;
  auto env = make(env_id, o);

  autotune::SearchBudget budget;
  budget.wall_seconds = seconds;
  budget.max_compilations = evals;
  budget.patience = patience;
  autotune::SearchOptions options;
  options.choice_cap = choice_cap;
  autotune::SearchResult result = autotune::run_technique(technique, *env, budget, seed, options);
  if (!compiler.empty()) result.compiler = compiler;
  result.save(out);
  std::printf("%s on %s: best %g (initial %g", result.technique.c_str(), result.benchmark.c_str(),
              result.best_metric, result.initial_metric);
  if (result.baseline_metric) std::printf(", baseline %g", *result.baseline_metric);
  std::printf(") after %lld evaluations in %.1fs\n", static_cast<long long>(result.evaluations), result.wall_seconds);
  return 0;
}

rest::RestServer* g_server = nullptr;

int run_serve(const std::string& host, int port, const std::string& static_dir, const std::string& compiler) {
  rest::ServerConfig config;
  config.sessions.make_options = base_options(compiler);
  if (!static_dir.empty()) config.static_dir = static_dir;
  rest::RestServer server(config);
  const int bound = server.bind(host, port);
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  server.serve();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optgym: compiler optimization environments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string compiler;
  app.add_option("--compiler", compiler, "gcc-v0 compiler specifier (path, name or docker:<image>)");

  std::string env_id = "tinyir-v0";
  std::string benchmark;
  auto* shell = app.add_subcommand("shell", "interactive environment loop");
  shell->add_option("--env", env_id);
  shell->add_option("--benchmark", benchmark);

  std::string state_path;
  bool quiet = false;
  auto* replay = app.add_subcommand("replay", "replay a state file step by step");
  replay->add_option("state", state_path)->required()->check(CLI::ExistingFile);
  replay->add_flag("-q,--quiet", quiet);
  auto* validate = app.add_subcommand("validate", "check a state file reproduces its digest");
  validate->add_option("state", state_path)->required()->check(CLI::ExistingFile);

  std::string fixture;
  bool dump = false;
  auto* gcc_space = app.add_subcommand("gcc-space", "extract a compiler's optimization space");
  gcc_space->add_option("--fixture", fixture, "directory of captured help text")->check(CLI::ExistingDirectory);
  gcc_space->add_flag("--dump", dump, "print the space as JSON");

  auto* ds = app.add_subcommand("datasets", "manage benchmark datasets");
  ds->require_subcommand(1);
  auto* ds_list = ds->add_subcommand("list", "list datasets");
  std::string ds_name, ds_dir;
  auto* ds_install = ds->add_subcommand("install", "install a remote dataset");
  ds_install->add_option("name", ds_name)->required();
  auto* ds_add = ds->add_subcommand("add", "register a directory of programs");
  ds_add->add_option("dir", ds_dir)->required()->check(CLI::ExistingDirectory);

  std::string technique = "random", out = "results", action_space;
  std::optional<double> budget_seconds;
  std::optional<std::int64_t> budget_evals, patience, choice_cap;
  std::uint64_t seed = 0;
  auto* search = app.add_subcommand("search", "run an autotuning search");
  search->add_option("--env", env_id);
  search->add_option("--benchmark", benchmark)->required();
  search->add_option("--technique", technique)->check(CLI::IsMember({"random", "greedy", "hillclimb", "ga"}));
  search->add_option("--budget-seconds", budget_seconds);
  search->add_option("--budget-evals", budget_evals);
  search->add_option("--patience", patience);
  search->add_option("--seed", seed);
  search->add_option("--out", out);
  search->add_option("--action-space", action_space);
  search->add_option("--choice-cap", choice_cap, "vector spaces: largest sampled choice index offset");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "geomean table of saved search results");
  report->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);

  std::string store_path, tsv_dir;
  auto* db = app.add_subcommand("db", "transition database maintenance");
  db->require_subcommand(1);
  auto* db_dedup = db->add_subcommand("dedup", "derive transitions from logged steps");
  db_dedup->add_option("store", store_path)->required();
  auto* db_export = db->add_subcommand("export", "write the tables as TSV files");
  db_export->add_option("store", store_path)->required();
  db_export->add_option("--out", tsv_dir)->required();
  auto* db_import = db->add_subcommand("import", "load TSV files into a store");
  db_import->add_option("store", store_path)->required();
  db_import->add_option("--from", tsv_dir)->required()->check(CLI::ExistingDirectory);

  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--static", static_dir, "UI assets to serve")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*shell) return run_shell(env_id, benchmark, compiler);
    if (*replay) return run_replay(state_path, compiler, quiet);
    if (*validate) return run_validate(state_path, compiler);
    if (*gcc_space) return run_gcc_space(compiler.empty() ? "gcc" : compiler, fixture, dump);
    if (*ds_list) {
      for (const auto& d : datasets().list()) {
        std::printf("%-24s %-8s %-10s %12llu  %s\n", d->name().c_str(), d->backend().c_str(),
                    std::string(to_string(d->origin())).c_str(), static_cast<unsigned long long>(d->size()),
                    d->description().c_str());
      }
      return 0;
    }
    if (*ds_install) {
      InstallStats stats;
      const auto d = datasets().install_remote(ds_name, &stats);
      std::printf("%s: %llu benchmarks%s\n", d->name().c_str(), static_cast<unsigned long long>(d->size()),
                  stats.downloaded ? "" : " (already installed)");
      return 0;
    }
    if (*ds_add) {
      const auto d = datasets().add_local_dataset(ds_dir);
      std::printf("%s: %llu benchmarks\n", d->name().c_str(), static_cast<unsigned long long>(d->size()));
      return 0;
    }
    if (*search) {
      return run_search(env_id, benchmark, technique, budget_seconds, budget_evals, patience, seed, out, compiler,
                        action_space, choice_cap);
    }
    if (*report) {
      std::cout << autotune::format_report(autotune::geomean_report(autotune::load_results(report_dir)));
      return 0;
    }
    if (*db_dedup) {
      tdb::TransitionStore store(store_path);
      const auto r = store.dedup_transitions();
      std::printf("created %lld transitions\n", static_cast<long long>(r.created));
      for (const auto& key : r.nondeterministic) std::printf("nondeterministic: %s\n", key.c_str());
      const auto missing = store.integrity_violations();
      for (const auto& d : missing) std::printf("missing observation: %s\n", d.c_str());
      return r.nondeterministic.empty() && missing.empty() ? 0 : 1;
    }
    if (*db_export || *db_import) {
      tdb::TransitionStore store(store_path);
      const auto c = *db_export ? store.export_tsv(tsv_dir) : store.import_tsv(tsv_dir);
      std::printf("steps %lld  observations %lld  transitions %lld\n", static_cast<long long>(c.steps),
                  static_cast<long long>(c.observations), static_cast<long long>(c.transitions));
      return 0;
    }
    if (*serve) return run_serve(host, port, static_dir, compiler);
  } catch (const Error& e) {
    std::fprintf(stderr, "optgym: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "optgym: %s\n", e.what());
    return 2;
  }
  return 0;
}
