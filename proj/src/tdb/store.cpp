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

#include "optgym/tdb/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"

namespace optgym::tdb {
namespace {

constexpr char kSchema[] = R"sql(
CREATE TABLE IF NOT EXISTS steps (
  benchmark TEXT NOT NULL,
  actions TEXT NOT NULL,
  state_digest TEXT NOT NULL,
  PRIMARY KEY (benchmark, actions)
);
CREATE TABLE IF NOT EXISTS observations (
  state_digest TEXT NOT NULL PRIMARY KEY,
  instcount INTEGER NOT NULL,
  opcode_histogram TEXT NOT NULL,
  ir_text_compressed BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS transitions (
  from_digest TEXT NOT NULL,
  action TEXT NOT NULL,
  to_digest TEXT NOT NULL,
  reward REAL NOT NULL,
  PRIMARY KEY (from_digest, action)
);
)sql";

constexpr char kStepsHeader[] = "benchmark\tactions\tstate_digest";
constexpr char kObservationsHeader[] = "state_digest\tinstcount\topcode_histogram\tir_base64";
constexpr char kTransitionsHeader[] = "from_digest\taction\tto_digest\treward";

// RAII prepared statement.
class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::io_failure, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& s) {
    sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, double v) {
    sqlite3_bind_double(stmt_, i, v);
    return *this;
  }
  Stmt& bind_blob(int i, const Bytes& b) {
    sqlite3_bind_blob(stmt_, i, b.data(), static_cast<int>(b.size()), SQLITE_TRANSIENT);
    return *this;
  }
  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(ErrorCode::io_failure, std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  /// Runs an insert and reports whether a row was added.
  bool exec_changed() {
    step();
    const bool changed = sqlite3_changes(db_) > 0;
    reset();
    return changed;
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }
  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }
  Bytes blob(int col) const {
    const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt_, col));
    return Bytes(p, p + sqlite3_column_bytes(stmt_, col));
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(ErrorCode::io_failure, "sqlite: " + msg);
  }
}

// Rolls back unless committed.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::io_failure, "bad integer field '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::int64_t> split_ints(const std::string& s) {
  std::vector<std::int64_t> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(parse_int(std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Each data line of `path` split on tabs, after checking the header.
std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path, const char* header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) throw Error(ErrorCode::io_failure, path.string() + ": bad header");
  const std::size_t columns = split_tabs(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    auto fields = split_tabs(line);
    if (fields.size() != columns) throw Error(ErrorCode::io_failure, path.string() + ": bad row '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

void check_field(const std::string& s) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::io_failure, "field contains a tab or newline: " + s);
  }
}

}  // namespace

std::vector<std::string> split_actions(const std::string& actions) {
  std::vector<std::string> out;
  if (actions.empty()) return out;
  std::string current;
  int depth = 0;
  for (char c : actions) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  out.push_back(std::move(current));
  return out;
}

std::string join_actions(const std::vector<std::string>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ',';
    out += actions[i];
  }
  return out;
}

TransitionStore::TransitionStore(const std::filesystem::path& path, std::size_t queue_capacity)
    : capacity_(queue_capacity) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error(ErrorCode::store_unwritable, path.string() + ": " + msg);
  }
  try {
    if (sqlite3_db_readonly(db_, "main") == 1) throw Error(ErrorCode::io_failure, "opened read-only");
    exec(db_, kSchema);
    // Proves the file accepts writes now rather than at the first flush.
    Transaction t(db_);
    t.commit();
  } catch (const Error& e) {
    sqlite3_close(db_);
    throw Error(ErrorCode::store_unwritable, path.string() + ": " + e.detail());
  }
  writer_ = std::thread([this] { writer_loop(); });
}

TransitionStore::~TransitionStore() {
  {
    std::lock_guard lock(queue_mu_);
    stop_ = true;
  }
  queue_cv_.notify_all();
  writer_.join();
  sqlite3_close(db_);
}

RowCounts TransitionStore::insert(const std::vector<StepsRow>& steps, const std::vector<ObservationsRow>& observations,
                                  const std::vector<TransitionRow>& transitions) {
  std::lock_guard lock(db_mu_);
  Transaction t(db_);
  RowCounts added;
  {
    Stmt s(db_, "INSERT OR IGNORE INTO steps VALUES (?, ?, ?)");
    for (const auto& r : steps) {
      added.steps += s.bind(1, r.benchmark).bind(2, r.actions).bind(3, r.state_digest).exec_changed();
    }
  }
  {
    Stmt s(db_, "INSERT OR IGNORE INTO observations VALUES (?, ?, ?, ?)");
    for (const auto& r : observations) {
      added.observations += s.bind(1, r.state_digest)
                                .bind(2, r.instcount)
                                .bind(3, join_ints(r.opcode_histogram))
                                .bind_blob(4, compress(r.ir_text))
                                .exec_changed();
    }
  }
  {
    Stmt s(db_, "INSERT OR IGNORE INTO transitions VALUES (?, ?, ?, ?)");
    for (const auto& r : transitions) {
      added.transitions +=
          s.bind(1, r.from_digest).bind(2, r.action).bind(3, r.to_digest).bind(4, r.reward).exec_changed();
    }
  }
  t.commit();
  return added;
}

bool TransitionStore::enqueue(StepsRow steps, std::optional<ObservationsRow> observation) {
  {
    std::lock_guard lock(queue_mu_);
    if (queue_.size() >= capacity_) {
      if (dropped_.fetch_add(1) == 0) {
        std::cerr << "optgym: transition store queue full (" << capacity_ << " rows); dropping rows\n";
      }
      return false;
    }
    queue_.push_back({std::move(steps), std::move(observation)});
  }
  queue_cv_.notify_one();
  return true;
}

void TransitionStore::flush() {
  std::unique_lock lock(queue_mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && !writing_; });
}

void TransitionStore::writer_loop() {
  std::unique_lock lock(queue_mu_);
  for (;;) {
    queue_cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
    if (queue_.empty()) return;  // stop requested and drained
    std::deque<Record> batch;
    batch.swap(queue_);
    writing_ = true;
    lock.unlock();
    std::vector<StepsRow> steps;
    std::vector<ObservationsRow> observations;
    for (auto& r : batch) {
      steps.push_back(std::move(r.steps));
      if (r.observation) observations.push_back(std::move(*r.observation));
    }
    try {
      insert(steps, observations);
    } catch (const Error& e) {
      std::cerr << "optgym: transition store write failed: " << e.what() << "\n";
      dropped_ += static_cast<std::int64_t>(steps.size());
    }
    lock.lock();
    writing_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

std::vector<StepsRow> TransitionStore::steps() const {
  std::lock_guard lock(db_mu_);
  Stmt s(db_, "SELECT benchmark, actions, state_digest FROM steps ORDER BY benchmark, actions");
  std::vector<StepsRow> rows;
  while (s.step()) rows.push_back({s.text(0), s.text(1), s.text(2)});
  return rows;
}

std::vector<ObservationsRow> TransitionStore::observations() const {
  std::lock_guard lock(db_mu_);
  Stmt s(db_, "SELECT state_digest, instcount, opcode_histogram, ir_text_compressed FROM observations "
              "ORDER BY state_digest");
  std::vector<ObservationsRow> rows;
  while (s.step()) rows.push_back({s.text(0), s.int64(1), split_ints(s.text(2)), decompress(s.blob(3))});
  return rows;
}

std::vector<TransitionRow> TransitionStore::transitions() const {
  std::lock_guard lock(db_mu_);
  Stmt s(db_, "SELECT from_digest, action, to_digest, reward FROM transitions ORDER BY from_digest, action");
  std::vector<TransitionRow> rows;
  while (s.step()) rows.push_back({s.text(0), s.text(1), s.text(2), s.real(3)});
  return rows;
}

RowCounts TransitionStore::counts() const {
  std::lock_guard lock(db_mu_);
  auto count = [&](const char* sql) {
    Stmt s(db_, sql);
    s.step();
    return s.int64(0);
  };
  return {count("SELECT COUNT(*) FROM steps"), count("SELECT COUNT(*) FROM observations"),
          count("SELECT COUNT(*) FROM transitions")};
}

DedupResult TransitionStore::dedup_transitions() {
  const auto all = steps();
  std::map<std::pair<std::string, std::string>, std::string> digest_of;
  for (const auto& r : all) digest_of[{r.benchmark, r.actions}] = r.state_digest;
  std::map<std::string, std::int64_t> instcount;
  {
    std::lock_guard lock(db_mu_);
    Stmt s(db_, "SELECT state_digest, instcount FROM observations");
    while (s.step()) instcount[s.text(0)] = s.int64(1);
  }

  std::vector<TransitionRow> candidates;
  for (const auto& r : all) {
    auto names = split_actions(r.actions);
    if (names.empty()) continue;
    const std::string action = names.back();
    names.pop_back();
    const auto parent = digest_of.find({r.benchmark, join_actions(names)});
    if (parent == digest_of.end()) continue;
    const auto from = instcount.find(parent->second);
    const auto to = instcount.find(r.state_digest);
    const double reward =
        from != instcount.end() && to != instcount.end() ? static_cast<double>(from->second - to->second) : 0.0;
    candidates.push_back({parent->second, action, r.state_digest, reward});
  }

  DedupResult result;
  std::lock_guard lock(db_mu_);
  Transaction t(db_);
  Stmt insert(db_, "INSERT OR IGNORE INTO transitions VALUES (?, ?, ?, ?)");
  Stmt existing(db_, "SELECT to_digest FROM transitions WHERE from_digest = ? AND action = ?");
  std::map<std::pair<std::string, std::string>, bool> reported;
  for (const auto& c : candidates) {
    if (insert.bind(1, c.from_digest).bind(2, c.action).bind(3, c.to_digest).bind(4, c.reward).exec_changed()) {
      ++result.created;
      continue;
    }
    existing.bind(1, c.from_digest).bind(2, c.action);
    if (existing.step() && existing.text(0) != c.to_digest && !reported[{c.from_digest, c.action}]) {
      reported[{c.from_digest, c.action}] = true;
      result.nondeterministic.push_back(c.from_digest + " " + c.action);
    }
    existing.reset();
  }
  t.commit();
  return result;
}

std::vector<std::string> TransitionStore::integrity_violations() const {
  std::lock_guard lock(db_mu_);
  Stmt s(db_, R"sql(
    SELECT 'steps ' || benchmark || ' [' || actions || '] -> ' || state_digest FROM steps
      WHERE state_digest NOT IN (SELECT state_digest FROM observations)
    UNION ALL
    SELECT 'transition from ' || from_digest FROM transitions
      WHERE from_digest NOT IN (SELECT state_digest FROM observations)
    UNION ALL
    SELECT 'transition to ' || to_digest FROM transitions
      WHERE to_digest NOT IN (SELECT state_digest FROM observations)
  )sql");
  std::vector<std::string> out;
  while (s.step()) out.push_back(s.text(0));
  return out;
}

RowCounts TransitionStore::export_tsv(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + (dir / name).string());
    return out;
  };
  RowCounts n;
  {
    auto out = open("steps.tsv");
    out << kStepsHeader << "\n";
    for (const auto& r : steps()) {
      check_field(r.benchmark);
      check_field(r.actions);
      out << r.benchmark << "\t" << r.actions << "\t" << r.state_digest << "\n";
      ++n.steps;
    }
    if (!out.flush()) throw Error(ErrorCode::io_failure, "write failed: steps.tsv");
  }
  {
    auto out = open("observations.tsv");
    out << kObservationsHeader << "\n";
    for (const auto& r : observations()) {
      out << r.state_digest << "\t" << r.instcount << "\t" << join_ints(r.opcode_histogram) << "\t"
          << base64_encode(r.ir_text) << "\n";
      ++n.observations;
    }
    if (!out.flush()) throw Error(ErrorCode::io_failure, "write failed: observations.tsv");
  }
  {
    auto out = open("transitions.tsv");
    out << kTransitionsHeader << "\n";
    for (const auto& r : transitions()) {
      check_field(r.action);
      out << r.from_digest << "\t" << r.action << "\t" << r.to_digest << "\t" << format_double(r.reward) << "\n";
      ++n.transitions;
    }
    if (!out.flush()) throw Error(ErrorCode::io_failure, "write failed: transitions.tsv");
  }
  return n;
}

RowCounts TransitionStore::import_tsv(const std::filesystem::path& dir) {
  std::vector<StepsRow> steps;
  for (auto& f : read_tsv(dir / "steps.tsv", kStepsHeader)) steps.push_back({f[0], f[1], f[2]});
  std::vector<ObservationsRow> observations;
  for (auto& f : read_tsv(dir / "observations.tsv", kObservationsHeader)) {
    const Bytes ir = base64_decode(f[3]);
    observations.push_back({f[0], parse_int(f[1]), split_ints(f[2]), std::string(ir.begin(), ir.end())});
  }
  std::vector<TransitionRow> transitions;
  for (auto& f : read_tsv(dir / "transitions.tsv", kTransitionsHeader)) {
    char* end = nullptr;
    const double reward = std::strtod(f[3].c_str(), &end);
    if (end != f[3].c_str() + f[3].size()) throw Error(ErrorCode::io_failure, "bad reward '" + f[3] + "'");
    transitions.push_back({f[0], f[1], f[2], reward});
  }
  return insert(steps, observations, transitions);
}

}  // namespace optgym::tdb
