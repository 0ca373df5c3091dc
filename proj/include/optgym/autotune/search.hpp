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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "optgym/env/env.hpp"

namespace optgym::autotune {

/// Limits on one search. Patience alone bounds only greedy search; the other
/// techniques also need a wall-clock or compilation bound.
struct SearchBudget {
  std::optional<double> wall_seconds;
  std::optional<std::int64_t> max_compilations;
  std::optional<std::int64_t> patience;  // steps or evaluations without improvement

  /// Throws Error(budget_invalid) unless some bound is set and all are positive.
  void validate() const;
};

struct SearchOptions {
  std::int64_t neighborhood_size = 5;  // hill climbing: edits per candidate
  std::int64_t sequence_cap = 64;      // hill climbing on action sequences
  std::int64_t population = 100;       // genetic algorithm
  double mutation_prob = 0.1;
  double crossover_prob = 0.5;
  double elite_fraction = 0.01;
  /// Vector spaces: candidates evaluated before any sampled one.
  std::vector<std::vector<std::int64_t>> initial_candidates;
  /// Vector spaces: sampled entries lie in [lower, min(upper, lower + cap)].
  /// Unset samples the whole range.
  std::optional<std::int64_t> choice_cap;
};

/// State after each action of the best trajectory.
struct TrajectoryPoint {
  std::string digest;
  double cumulative_reward = 0;
  bool operator==(const TrajectoryPoint&) const = default;
};

/// Outcome of one search. Metrics are costs of the reward space's metric
/// observation, so lower is better.
struct SearchResult {
  std::string technique;
  std::string benchmark;
  EnvState best_state;
  double best_metric = 0;
  std::int64_t evaluations = 0;
  double wall_seconds = 0;
  std::uint64_t seed = 0;

  std::string action_space;
  std::optional<std::string> compiler;
  double initial_metric = 0;
  std::optional<double> baseline_metric;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<double> best_trace;  // best metric after each evaluation
  std::vector<std::string> generation_digests;  // genetic algorithm only
  std::vector<double> generation_best;

  /// Everything except best_state, which is stored as EnvState JSON.
  nlohmann::json metadata() const;
  static SearchResult from_json(const EnvState& state, const nlohmann::json& metadata);

  /// Writes <stem>.state.json and <stem>.meta.json into `dir`; returns the
  /// metadata path.
  std::filesystem::path save(const std::filesystem::path& dir) const;
  static SearchResult load(const std::filesystem::path& meta_path);
  std::string stem() const;
};

/// Every *.meta.json in `dir`, sorted by file name.
std::vector<SearchResult> load_results(const std::filesystem::path& dir);

/// Discrete spaces: random single actions from reset, restarting the episode
/// after `patience` steps without a positive reward. Vector spaces: i.i.d.
/// uniform choice vectors, stopping after `patience` evaluations without
/// improvement.
SearchResult random_search(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                           const SearchOptions& options = {});

/// Each round forks the environment once per action and commits the action
/// with the highest reward (lowest index on ties), until no action has a
/// positive reward. Throws Error(fork_unavailable).
SearchResult greedy_search(Environment& env, const SearchBudget& budget);

/// Accepts a candidate only when it is strictly cheaper. Vector spaces
/// reassign `neighborhood_size` random options; discrete spaces apply that
/// many insert/delete/replace edits to an action sequence.
SearchResult hill_climb(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                        const SearchOptions& options = {});

/// Generational GA over a vector space: tournament selection of size 2,
/// uniform crossover, per-gene resampling mutation and elitism.
SearchResult genetic_algorithm(Environment& env, const SearchBudget& budget, std::uint64_t seed,
                               const SearchOptions& options = {});

/// Dispatches on "random", "greedy", "hillclimb" or "ga".
SearchResult run_technique(const std::string& technique, Environment& env, const SearchBudget& budget,
                           std::uint64_t seed, const SearchOptions& options = {});

struct ReplayReport {
  bool ok = false;
  /// Actions applied when the first mismatch was seen (0 means at reset).
  std::optional<std::size_t> divergent_step;
  std::string detail;
  explicit operator bool() const { return ok; }
};

/// Re-executes the best trajectory one action at a time. Throws
/// Error(unknown_benchmark) when the benchmark cannot be loaded.
ReplayReport replay_validate(const SearchResult& result, MakeOptions options = {});

struct ReportRow {
  std::string technique;
  std::size_t benchmarks = 0;
  double geomean = 0;  // of baseline / best
};

/// One row per technique, over results that carry a baseline.
std::vector<ReportRow> geomean_report(const std::vector<SearchResult>& results);
std::string format_report(const std::vector<ReportRow>& rows);

}  // namespace optgym::autotune
