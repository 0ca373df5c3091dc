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

#include "optgym/autotune/search.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/rng.hpp"
#include "optgym/env/registry.hpp"

namespace optgym::autotune {
namespace {

using Clock = std::chrono::steady_clock;
using Vector = std::vector<std::int64_t>;
constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<std::string> kNoRewards;

bool needs_hard_bound(const SearchBudget& budget) {
  return !budget.wall_seconds && !budget.max_compilations;
}

// Bookkeeping shared by every technique: budget, best-so-far and the metric
// observation that defines cost.
class Search {
 public:
  Search(Environment& env, const SearchBudget& budget, std::string technique, std::uint64_t seed)
      : env_(env), budget_(budget), start_(Clock::now()) {
    budget.validate();
    result_.technique = std::move(technique);
    result_.seed = seed;
    const auto reward = env.reward_space();
    if (!reward) throw Error(ErrorCode::invalid_argument, "search needs an environment with a default reward space");
    reward_ = *reward;
    const EnvSpec& spec = env_spec(env.env_id());
    for (const auto& r : spec.rewards) {
      if (r.id == reward_) metric_ = r.metric;
    }
    if (metric_.empty()) throw Error(ErrorCode::unknown_space, "reward space " + reward_);
    for (const auto& r : spec.rewards) {
      if (r.metric == metric_ && !r.baseline.empty() && baseline_.empty()) baseline_ = r.baseline;
    }

    env_.reset();
    std::vector<std::string> observe{metric_};
    if (!baseline_.empty()) observe.push_back(baseline_);
    const StepReply r = env_.step({}, observe, kNoRewards);
    if (r.info.count("error")) throw Error(error_code_from_string(r.info.at("error")), r.info.at("detail"));
    result_.benchmark = env_.benchmark();
    result_.action_space = env_.action_space().id;
    result_.initial_metric = observation_scalar(r.observations.at(0));
    if (!baseline_.empty()) result_.baseline_metric = observation_scalar(r.observations.at(1));
    best_ = result_.initial_metric;
    best_state_ = env_.state();
  }

  Environment& env() { return env_; }
  const std::string& metric() const { return metric_; }
  const std::string& reward() const { return reward_; }
  double best() const { return best_; }
  std::int64_t evaluations() const { return result_.evaluations; }

  bool exhausted() const {
    if (budget_.max_compilations && result_.evaluations >= *budget_.max_compilations) return true;
    if (budget_.wall_seconds) {
      const std::chrono::duration<double> elapsed = Clock::now() - start_;
      if (elapsed.count() >= *budget_.wall_seconds) return true;
    }
    return false;
  }

  /// Counts one evaluation of cost `cost` for the environment's current
  /// state; keeps that state when it is the cheapest so far.
  void record(double cost, const Environment& state_of, bool last_action_only = false) {
    ++result_.evaluations;
    if (cost < best_) {
      best_ = cost;
      best_state_ = state_of.state();
      // A choice vector fixes the whole state, so the last one replays it.
      if (last_action_only && best_state_.actions.size() > 1) {
        best_state_.actions.erase(best_state_.actions.begin(), best_state_.actions.end() - 1);
      }
    }
    result_.best_trace.push_back(best_);
  }

  /// Steps `actions` (from the current state) and returns the metric, or
  /// infinity when the backend rejects the state.
  double step_cost(Environment& e, const std::vector<Action>& actions, double* reward = nullptr) {
    if (e.done()) e.reset();
    const StepReply r = reward ? e.step(actions, std::vector<std::string>{metric_}, std::vector<std::string>{reward_})
                               : e.step(actions, std::vector<std::string>{metric_}, kNoRewards);
    if (r.info.count("error") || r.observations.empty()) {
      if (reward) *reward = -kInf;
      return kInf;
    }
    if (reward) *reward = r.rewards.at(0);
    return observation_scalar(r.observations.at(0));
  }

  void end_generation(const std::string& digest, double best) {
    result_.generation_digests.push_back(digest);
    result_.generation_best.push_back(best);
  }

  /// Replays the best trajectory from reset, recording every intermediate
  /// state, and checks that it lands on the recorded best state.
  SearchResult finish() {
    env_.reset(best_state_.benchmark);
    result_.trajectory.clear();
    const SpaceDescriptor& space = env_.action_space();
    for (const auto& name : best_state_.actions) {
      const StepReply r = env_.step({action_from_name(space, name)}, std::vector<std::string>{}, kNoRewards);
      if (r.info.count("error")) {
        throw Error(ErrorCode::digest_mismatch, "replay of the best state failed: " + r.info.at("error"));
      }
      result_.trajectory.push_back({env_.state_digest(), env_.cumulative_reward()});
    }
    if (env_.state_digest() != best_state_.state_digest) {
      throw Error(ErrorCode::digest_mismatch, "replay of the best state reached a different digest");
    }
    const StepReply r = env_.step({}, std::vector<std::string>{metric_}, kNoRewards);
    result_.best_state = env_.state();
    result_.best_metric = observation_scalar(r.observations.at(0));
    const std::chrono::duration<double> elapsed = Clock::now() - start_;
    result_.wall_seconds = elapsed.count();
    return result_;
  }

  void set_best_state(EnvState state, double cost) {
    best_state_ = std::move(state);
    best_ = cost;
  }

 private:
  Environment& env_;
  SearchBudget budget_;
  Clock::time_point start_;
  std::string reward_;
  std::string metric_;
  std::string baseline_;
  double best_ = kInf;
  EnvState best_state_;
  SearchResult result_;
};

bool is_vector_space(const Environment& env) { return env.action_space().kind == SpaceKind::integer_box; }

void require_discrete(const Environment& env, const char* technique) {
  if (env.action_space().kind != SpaceKind::discrete || env.action_space().n <= 0) {
    throw Error(ErrorCode::invalid_argument, std::string(technique) + " needs a discrete action space");
  }
}

void require_vector(const Environment& env, const char* technique) {
  if (!is_vector_space(env)) {
    throw Error(ErrorCode::invalid_argument, std::string(technique) + " needs an integer vector action space");
  }
}

std::int64_t random_entry(const SpaceDescriptor& space, std::size_t i, const SearchOptions& options, Rng& rng) {
  if (options.choice_cap && *options.choice_cap < 0) throw Error(ErrorCode::budget_invalid, "choice_cap must be >= 0");
  const std::int64_t hi = options.choice_cap ? std::min(space.upper[i], space.lower[i] + *options.choice_cap)
                                             : space.upper[i];
  return rng.uniform_int(space.lower[i], hi);
}

Vector random_vector(const SpaceDescriptor& space, const SearchOptions& options, Rng& rng) {
  Vector v(space.lower.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = random_entry(space, i, options, rng);
  return v;
}

// Evaluates one full choice vector.
double eval_vector(Search& s, const Vector& v) {
  const double cost = s.step_cost(s.env(), {Action{v}});
  s.record(cost, s.env(), /*last_action_only=*/true);
  return cost;
}

// Evaluates an action sequence from a fresh episode.
double eval_sequence(Search& s, const std::vector<std::int64_t>& seq) {
  s.env().reset();
  std::vector<Action> actions(seq.begin(), seq.end());
  const double cost = s.step_cost(s.env(), actions);
  s.record(cost, s.env());
  return cost;
}

std::string population_digest(const std::vector<Vector>& population) {
  std::string text;
  for (const auto& v : population) {
    for (auto x : v) text += std::to_string(x) + ",";
    text += ";";
  }
  return sha256_hex(text);
}

}  // namespace

void SearchBudget::validate() const {
  if (!wall_seconds && !max_compilations && !patience) {
    throw Error(ErrorCode::budget_invalid, "no bound set");
  }
  if (wall_seconds && !(*wall_seconds > 0)) throw Error(ErrorCode::budget_invalid, "wall_seconds must be > 0");
  if (max_compilations && *max_compilations <= 0) throw Error(ErrorCode::budget_invalid, "max_compilations must be > 0");
  if (patience && *patience <= 0) throw Error(ErrorCode::budget_invalid, "patience must be > 0");
}

SearchResult random_search(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                           const SearchOptions& options) {
  budget.validate();
  if (needs_hard_bound(budget)) throw Error(ErrorCode::budget_invalid, "random search needs a time or compilation bound");
  Search s(env, budget, "random", seed);
  Rng rng(seed);
  std::int64_t stale = 0;

  if (is_vector_space(env)) {
    const SpaceDescriptor space = env.action_space();
    std::size_t next_candidate = 0;
    while (!s.exhausted()) {
      const double before = s.best();
      const Vector v = next_candidate < options.initial_candidates.size()
                           ? options.initial_candidates[next_candidate++]
                           : random_vector(space, options, rng);
      eval_vector(s, v);
      stale = s.best() < before ? 0 : stale + 1;
      if (budget.patience && stale >= *budget.patience) break;
    }
    return s.finish();
  }

  require_discrete(env, "random search");
  const std::int64_t n = env.action_space().n;
  while (!s.exhausted()) {
    if (env.done()) {
      env.reset();
      stale = 0;
    }
    const auto a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
    double reward = 0;
    const double cost = s.step_cost(env, {Action{a}}, &reward);
    s.record(cost, env);
    stale = reward > 0 ? 0 : stale + 1;
    if ((budget.patience && stale >= *budget.patience) || cost == kInf) {
      env.reset();
      stale = 0;
    }
  }
  return s.finish();
}

SearchResult greedy_search(Environment& env, const SearchBudget& budget) {
  budget.validate();
  require_discrete(env, "greedy search");
  Search s(env, budget, "greedy", 0);
  auto fork_of = [](Environment& e) {
    try {
      return e.fork();
    } catch (const Error& err) {
      throw Error(ErrorCode::fork_unavailable, err.what());
    }
  };

  std::unique_ptr<Environment> current = fork_of(env);
  double current_cost = s.best();
  const std::int64_t n = env.action_space().n;
  bool out_of_budget = false;
  while (!out_of_budget) {
    std::unique_ptr<Environment> best_fork;
    double best_reward = 0;
    double best_cost = current_cost;
    for (std::int64_t a = 0; a < n; ++a) {
      if (s.exhausted()) {
        out_of_budget = true;
        break;
      }
      std::unique_ptr<Environment> f = fork_of(*current);
      double reward = 0;
      const double cost = s.step_cost(*f, {Action{a}}, &reward);
      s.record(cost, *f);
      if (reward > best_reward) {
        best_reward = reward;
        best_cost = cost;
        best_fork = std::move(f);
      }
    }
    if (!best_fork) break;
    current = std::move(best_fork);
    current_cost = best_cost;
  }
  // The committed trajectory is the result even when a detour was cheaper.
  s.set_best_state(current->state(), current_cost);
  return s.finish();
}

SearchResult hill_climb(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                        const SearchOptions& options) {
  budget.validate();
  if (needs_hard_bound(budget)) throw Error(ErrorCode::budget_invalid, "hill climbing needs a time or compilation bound");
  if (options.neighborhood_size <= 0) throw Error(ErrorCode::budget_invalid, "neighborhood_size must be > 0");
  if (options.sequence_cap <= 0) throw Error(ErrorCode::budget_invalid, "sequence_cap must be > 0");
  Search s(env, budget, "hillclimb", seed);
  Rng rng(seed);
  std::int64_t stale = 0;
  auto patience_over = [&] { return budget.patience && stale >= *budget.patience; };

  if (is_vector_space(env)) {
    const SpaceDescriptor space = env.action_space();
    Vector current;
    double current_cost = kInf;
    for (const auto& c : options.initial_candidates) {
      if (s.exhausted()) break;
      const double cost = eval_vector(s, c);
      if (cost < current_cost) {
        current = c;
        current_cost = cost;
      }
    }
    if (current.empty() && !s.exhausted()) {
      current = random_vector(space, options, rng);
      current_cost = eval_vector(s, current);
    }
    while (!s.exhausted() && !patience_over()) {
      Vector candidate = current;
      for (std::int64_t k = 0; k < options.neighborhood_size; ++k) {
        const auto i = rng.below(candidate.size());
        candidate[i] = random_entry(space, i, options, rng);
      }
      const double cost = eval_vector(s, candidate);
      if (cost < current_cost) {
        current = std::move(candidate);
        current_cost = cost;
        stale = 0;
      } else {
        ++stale;
      }
    }
    return s.finish();
  }

  require_discrete(env, "hill climbing");
  const auto n = static_cast<std::uint64_t>(env.action_space().n);
  const auto cap = static_cast<std::size_t>(options.sequence_cap);
  std::vector<std::int64_t> current;
  double current_cost = s.best();
  while (!s.exhausted() && !patience_over()) {
    std::vector<std::int64_t> candidate = current;
    for (std::int64_t k = 0; k < options.neighborhood_size; ++k) {
      enum Edit { insert, erase, replace };
      std::vector<Edit> edits;
      if (candidate.size() < cap) edits.push_back(insert);
      if (!candidate.empty()) {
        edits.push_back(erase);
        edits.push_back(replace);
      }
      const Edit edit = edits[rng.below(edits.size())];
      const auto action = [&] { return static_cast<std::int64_t>(rng.below(n)); };
      if (edit == insert) {
        const auto pos = rng.below(candidate.size() + 1);
        candidate.insert(candidate.begin() + static_cast<std::ptrdiff_t>(pos), action());
      } else if (edit == erase) {
        candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(rng.below(candidate.size())));
      } else {
        candidate[rng.below(candidate.size())] = action();
      }
    }
    const double cost = eval_sequence(s, candidate);
    if (cost < current_cost) {
      current = std::move(candidate);
      current_cost = cost;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return s.finish();
}

SearchResult genetic_algorithm(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                               const SearchOptions& options) {
  budget.validate();
  require_vector(env, "the genetic algorithm");
  if (needs_hard_bound(budget)) throw Error(ErrorCode::budget_invalid, "the genetic algorithm needs a time or compilation bound");
  if (options.population < 2) throw Error(ErrorCode::budget_invalid, "population must be >= 2");
  if (budget.max_compilations && options.population > *budget.max_compilations) {
    throw Error(ErrorCode::budget_invalid, "population exceeds max_compilations");
  }
  for (double p : {options.mutation_prob, options.crossover_prob, options.elite_fraction}) {
    if (!(p >= 0 && p <= 1)) throw Error(ErrorCode::budget_invalid, "probabilities must lie in [0, 1]");
  }
  Search s(env, budget, "ga", seed);
  Rng rng(seed);
  const SpaceDescriptor space = env.action_space();
  const auto size = static_cast<std::size_t>(options.population);
  const std::size_t elites =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(options.elite_fraction * options.population)));

  std::vector<Vector> population;
  std::vector<double> fitness;
  for (const auto& c : options.initial_candidates) {
    if (population.size() == size) break;
    population.push_back(c);
  }
  while (population.size() < size) population.push_back(random_vector(space, options, rng));
  for (const auto& v : population) {
    if (s.exhausted()) return s.finish();
    fitness.push_back(eval_vector(s, v));
  }
  s.end_generation(population_digest(population), *std::min_element(fitness.begin(), fitness.end()));

  auto tournament = [&] {
    const auto a = rng.below(size);
    const auto b = rng.below(size);
    return fitness[b] < fitness[a] ? b : a;
  };
  while (!s.exhausted()) {
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitness[a] < fitness[b]; });
    std::vector<Vector> next;
    std::vector<double> next_fitness;
    for (std::size_t i = 0; i < elites; ++i) {
      next.push_back(population[order[i]]);
      next_fitness.push_back(fitness[order[i]]);
    }
    while (next.size() < size && !s.exhausted()) {
      const auto p1 = tournament();
      const auto p2 = tournament();
      Vector child = population[p1];
      if (rng.bernoulli(options.crossover_prob)) {
        for (std::size_t g = 0; g < child.size(); ++g) {
          if (rng.bernoulli(0.5)) child[g] = population[p2][g];
        }
      }
      for (std::size_t g = 0; g < child.size(); ++g) {
        if (rng.bernoulli(options.mutation_prob)) child[g] = random_entry(space, g, options, rng);
      }
      next_fitness.push_back(eval_vector(s, child));
      next.push_back(std::move(child));
    }
    if (next.size() < size) break;
    population = std::move(next);
    fitness = std::move(next_fitness);
    s.end_generation(population_digest(population), *std::min_element(fitness.begin(), fitness.end()));
  }
  return s.finish();
}

SearchResult run_technique(const std::string& technique, Environment& env, const SearchBudget& budget,
                           std::uint64_t seed, const SearchOptions& options) {
  if (technique == "random") return random_search(env, budget, seed, options);
  if (technique == "greedy") return greedy_search(env, budget);
  if (technique == "hillclimb") return hill_climb(env, budget, seed, options);
  if (technique == "ga") return genetic_algorithm(env, budget, seed, options);
  throw Error(ErrorCode::invalid_argument, "unknown technique " + technique);
}

nlohmann::json SearchResult::metadata() const {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& p : trajectory) traj.push_back({{"digest", p.digest}, {"cumulative_reward", p.cumulative_reward}});
  return {
      {"version", 1},
      {"technique", technique},
      {"benchmark", benchmark},
      {"best_metric", best_metric},
      {"evaluations", evaluations},
      {"wall_seconds", wall_seconds},
      {"seed", seed},
      {"action_space", action_space},
      {"compiler", compiler ? nlohmann::json(*compiler) : nlohmann::json(nullptr)},
      {"initial_metric", initial_metric},
      {"baseline_metric", baseline_metric ? nlohmann::json(*baseline_metric) : nlohmann::json(nullptr)},
      {"trajectory", traj},
      {"best_trace", best_trace},
      {"generation_digests", generation_digests},
      {"generation_best", generation_best},
      {"state_file", stem() + ".state.json"},
  };
}

SearchResult SearchResult::from_json(const EnvState& state, const nlohmann::json& j) {
  try {
    if (j.at("version") != 1) throw Error(ErrorCode::invalid_argument, "unsupported result version");
    SearchResult r;
    r.technique = j.at("technique");
    r.benchmark = j.at("benchmark");
    r.best_state = state;
    r.best_metric = j.at("best_metric");
    r.evaluations = j.at("evaluations");
    r.wall_seconds = j.at("wall_seconds");
    r.seed = j.at("seed");
    r.action_space = j.at("action_space");
    if (!j.at("compiler").is_null()) r.compiler = j.at("compiler").get<std::string>();
    r.initial_metric = j.at("initial_metric");
    if (!j.at("baseline_metric").is_null()) r.baseline_metric = j.at("baseline_metric").get<double>();
    for (const auto& p : j.at("trajectory")) r.trajectory.push_back({p.at("digest"), p.at("cumulative_reward")});
    r.best_trace = j.at("best_trace").get<std::vector<double>>();
    r.generation_digests = j.at("generation_digests").get<std::vector<std::string>>();
    r.generation_best = j.at("generation_best").get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed search result: ") + e.what());
  }
}

std::string SearchResult::stem() const {
  std::string name = technique + "-" + benchmark + "-s" + std::to_string(seed);
  for (char& c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return name;
}

fs::path SearchResult::save(const fs::path& dir) const {
  fs::create_directories(dir);
  best_state.save(dir / (stem() + ".state.json"));
  const fs::path meta = dir / (stem() + ".meta.json");
  write_file_atomic(meta, metadata().dump(2) + "\n");
  return meta;
}

SearchResult SearchResult::load(const fs::path& meta_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, meta_path.string() + ": " + e.what());
  }
  const EnvState state = EnvState::load(meta_path.parent_path() / j.at("state_file").get<std::string>());
  return from_json(state, j);
}

std::vector<SearchResult> load_results(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 10 && name.ends_with(".meta.json")) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<SearchResult> results;
  for (const auto& p : paths) results.push_back(SearchResult::load(p));
  return results;
}

ReplayReport replay_validate(const SearchResult& result, MakeOptions options) {
  const EnvState& state = result.best_state;
  options.benchmark = state.benchmark;
  options.reward_space = state.reward_space_id.empty() ? std::nullopt : std::optional(state.reward_space_id);
  options.action_space = result.action_space;
  if (result.compiler) options.compiler = result.compiler;
  auto env = make(state.env_id, options);
  env->reset();

  ReplayReport report;
  auto diverge = [&](std::size_t step, std::string detail) {
    report.divergent_step = step;
    report.detail = std::move(detail);
    return report;
  };
  const bool check_steps = result.trajectory.size() == state.actions.size();
  for (std::size_t i = 0; i < state.actions.size(); ++i) {
    const StepReply r = env->step({action_from_name(env->action_space(), state.actions[i])},
                                  std::vector<std::string>{}, kNoRewards);
    if (r.info.count("error")) return diverge(i + 1, "step failed: " + r.info.at("error"));
    if (!check_steps) continue;
    const TrajectoryPoint& want = result.trajectory[i];
    if (env->state_digest() != want.digest) return diverge(i + 1, "digest differs after " + state.actions[i]);
    if (std::abs(env->cumulative_reward() - want.cumulative_reward) > 1e-9) {
      return diverge(i + 1, "cumulative reward differs after " + state.actions[i]);
    }
  }
  const std::size_t last = state.actions.size();
  if (env->state_digest() != state.state_digest) return diverge(last, "final digest differs");
  if (std::abs(env->cumulative_reward() - state.cumulative_reward) > 1e-9) {
    std::ostringstream detail;
    detail.precision(17);
    detail << "final cumulative reward " << env->cumulative_reward() << " != recorded " << state.cumulative_reward;
    return diverge(last, detail.str());
  }
  report.ok = true;
  return report;
}

std::vector<ReportRow> geomean_report(const std::vector<SearchResult>& results) {
  std::map<std::string, std::pair<double, std::size_t>> sums;  // technique -> (Σ log ratio, count)
  for (const auto& r : results) {
    if (!r.baseline_metric || r.best_metric <= 0 || *r.baseline_metric <= 0) continue;
    auto& [sum, count] = sums[r.technique];
    sum += std::log(*r.baseline_metric / r.best_metric);
    ++count;
  }
  std::vector<ReportRow> rows;
  for (const auto& [technique, acc] : sums) {
    rows.push_back({technique, acc.second, std::exp(acc.first / static_cast<double>(acc.second))});
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "technique\tbenchmarks\tgeomean_reduction\n";
  out.setf(std::ios::fixed);
  out.precision(4);
  for (const auto& r : rows) out << r.technique << "\t" << r.benchmarks << "\t" << r.geomean << "x\n";
  return out.str();
}

}  // namespace optgym::autotune
