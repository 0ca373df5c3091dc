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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

struct sqlite3;

namespace optgym::tdb {

/// One action sequence applied to a benchmark from reset, and the state it
/// reached. `actions` is the comma-joined action-name list.
struct StepsRow {
  std::string benchmark;
  std::string actions;
  std::string state_digest;
  auto operator<=>(const StepsRow&) const = default;
};

struct ObservationsRow {
  std::string state_digest;
  std::int64_t instcount = 0;
  std::vector<std::int64_t> opcode_histogram;
  std::string ir_text;  // stored zlib-compressed
  auto operator<=>(const ObservationsRow&) const = default;
};

struct TransitionRow {
  std::string from_digest;
  std::string action;
  std::string to_digest;
  double reward = 0;
  auto operator<=>(const TransitionRow&) const = default;
};

struct DedupResult {
  std::int64_t created = 0;
  /// "<from_digest> <action>" for keys seen leading to two different states.
  std::vector<std::string> nondeterministic;
};

struct RowCounts {
  std::int64_t steps = 0;
  std::int64_t observations = 0;
  std::int64_t transitions = 0;
  bool operator==(const RowCounts&) const = default;
};

/// Splits a comma-joined action list, ignoring commas inside brackets (as in
/// choice-vector names such as "[1,0,2]").
std::vector<std::string> split_actions(const std::string& actions);
std::string join_actions(const std::vector<std::string>& actions);

/// Embedded relational store with conflict-ignoring inserts and one
/// background writer fed by a bounded queue.
class TransitionStore {
 public:
  static constexpr std::size_t kDefaultQueueCapacity = 10000;

  /// Throws Error(store_unwritable).
  explicit TransitionStore(const std::filesystem::path& path, std::size_t queue_capacity = kDefaultQueueCapacity);
  ~TransitionStore();
  TransitionStore(const TransitionStore&) = delete;
  TransitionStore& operator=(const TransitionStore&) = delete;

  /// Synchronous inserts; returns the number of new rows.
  RowCounts insert(const std::vector<StepsRow>& steps, const std::vector<ObservationsRow>& observations,
                   const std::vector<TransitionRow>& transitions = {});

  /// Queues rows for the background writer without blocking. Returns false
  /// (and counts a drop) when the queue is full.
  bool enqueue(StepsRow steps, std::optional<ObservationsRow> observation);
  /// Returns once everything queued before the call is written.
  void flush();
  std::int64_t dropped() const { return dropped_.load(); }

  std::vector<StepsRow> steps() const;
  std::vector<ObservationsRow> observations() const;
  std::vector<TransitionRow> transitions() const;
  RowCounts counts() const;

  /// Joins every Steps row with its one-action extensions. Rewards are the
  /// instcount decrease. Idempotent.
  DedupResult dedup_transitions();

  /// Digests referenced by Steps or Transitions rows but missing from
  /// Observations.
  std::vector<std::string> integrity_violations() const;

  /// Writes steps.tsv, observations.tsv and transitions.tsv. Throws
  /// Error(io_failure).
  RowCounts export_tsv(const std::filesystem::path& dir) const;
  /// Loads files written by export_tsv; returns the number of new rows.
  RowCounts import_tsv(const std::filesystem::path& dir);

 private:
  struct Record {
    StepsRow steps;
    std::optional<ObservationsRow> observation;
  };
  void writer_loop();

  sqlite3* db_ = nullptr;
  mutable std::mutex db_mu_;

  std::size_t capacity_;
  std::deque<Record> queue_;
  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  bool writing_ = false;
  bool stop_ = false;
  std::atomic<std::int64_t> dropped_{0};
  std::thread writer_;
};

}  // namespace optgym::tdb
