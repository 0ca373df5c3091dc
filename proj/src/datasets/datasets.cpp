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

#include "optgym/datasets/datasets.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <iostream>

#include "httplib.h"
#include "json.hpp"
#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/subprocess.hpp"
#include "optgym/tinyir/generator.hpp"
#include "optgym/tinyir/ir.hpp"

namespace optgym {
namespace {

using json = nlohmann::json;

constexpr char kUserDataset[] = "user-v0";

std::string read_benchmark_file(const fs::path& path) {
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::unreadable_file, e.detail());
  }
}

fs::path user_registry_path() { return cache_dir() / "user-datasets.json"; }
fs::path installed_root() { return cache_dir() / "datasets"; }

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fs::create_directories(path.parent_path());
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::io_failure, "cannot open lock " + path.string());
    while (::flock(fd_, LOCK_EX) != 0 && errno == EINTR) {
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

// Throws Error(network_failure) for transport problems.
void download(const std::string& url, const fs::path& dest) {
  constexpr std::string_view kFile = "file://";
  if (url.rfind(kFile, 0) == 0) {
    std::error_code ec;
    fs::copy_file(url.substr(kFile.size()), dest, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error(ErrorCode::network_failure, url + ": " + ec.message());
    return;
  }
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::network_failure, "bad url " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  std::ofstream out(dest, std::ios::binary | std::ios::trunc);
  int status = 0;
  const auto res = client.Get(
      path,
      [&](const httplib::Response& r) {
        status = r.status;
        return r.status == 200;
      },
      [&](const char* data, std::size_t n) {
        out.write(data, static_cast<std::streamsize>(n));
        return static_cast<bool>(out);
      });
  out.close();
  if (!res) throw Error(ErrorCode::network_failure, url + ": " + httplib::to_string(res.error()));
  if (status != 200) throw Error(ErrorCode::network_failure, url + ": HTTP " + std::to_string(status));
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + dest.string());
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file(path)); }

// Drops symlinks and anything that is not a regular file or directory.
void scrub_tree(const fs::path& root) {
  std::vector<fs::path> doomed;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    const auto st = it->symlink_status();
    if (fs::is_symlink(st) || !(fs::is_regular_file(st) || fs::is_directory(st))) {
      doomed.push_back(it->path());
      if (fs::is_directory(st)) it.disable_recursion_pending();
    }
  }
  for (const auto& p : doomed) fs::remove_all(p);
}

}  // namespace

std::string_view to_string(DatasetOrigin origin) {
  switch (origin) {
    case DatasetOrigin::builtin_suite: return "builtin-suite";
    case DatasetOrigin::generator: return "generator";
    case DatasetOrigin::local_dir: return "local-dir";
    case DatasetOrigin::remote_archive: return "remote-archive";
  }
  return "?";
}

std::string benchmark_digest(const Benchmark& benchmark) {
  if (benchmark.content) return sha256_hex(*benchmark.content);
  const auto seed = parse_seed_path(benchmark.uri.path);
  if (!seed) throw Error(ErrorCode::unknown_benchmark, benchmark.uri.str());
  return sha256_hex(tinyir::to_text(tinyir::generate(*seed)));
}

BenchmarkUri BenchmarkRange::iterator::operator*() const { return dataset_->benchmark_at(index_); }

FileDataset::FileDataset(std::string name, std::string description, DatasetOrigin origin,
                         std::string backend, std::map<std::string, fs::path> files)
    : Dataset(std::move(name), std::move(description), origin, std::move(backend)),
      files_(std::move(files)) {
  paths_.reserve(files_.size());
  for (const auto& [path, file] : files_) paths_.push_back(path);
}

BenchmarkUri FileDataset::benchmark_at(std::uint64_t index) const {
  if (index >= paths_.size()) throw Error(ErrorCode::unknown_benchmark, "index out of range");
  return {name(), paths_[index]};
}

fs::path FileDataset::file(const BenchmarkUri& uri) const {
  const auto it = files_.find(uri.path);
  if (uri.dataset != name() || it == files_.end()) {
    throw Error(ErrorCode::unknown_benchmark, uri.str());
  }
  return it->second;
}

Benchmark FileDataset::load(const BenchmarkUri& uri) const {
  return {uri, read_benchmark_file(file(uri))};
}

GeneratorDataset::GeneratorDataset()
    : Dataset("tinyir-gen-v0", "Seeded random tinyir programs, one per 32-bit seed",
              DatasetOrigin::generator, "tinyir") {}

BenchmarkUri GeneratorDataset::benchmark_at(std::uint64_t index) const {
  if (index >= size()) throw Error(ErrorCode::unknown_benchmark, "seed out of range");
  return {name(), "seed-" + std::to_string(index)};
}

Benchmark GeneratorDataset::load(const BenchmarkUri& uri) const {
  if (uri.dataset != name() || !parse_seed_path(uri.path)) {
    throw Error(ErrorCode::unknown_benchmark, uri.str());
  }
  return {uri, std::nullopt};
}

std::string backend_for_extension(const std::string& extension) {
  if (extension == ".tir") return "tinyir";
  if (extension == ".c") return "gcc";
  return "";
}

std::map<std::string, fs::path> scan_directory(const fs::path& root,
                                               const std::vector<std::string>& extensions,
                                               bool keep_extension, std::vector<fs::path>* ignored) {
  std::map<std::string, fs::path> files;
  if (!fs::is_directory(root)) return files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end()) {
      if (ignored != nullptr) ignored->push_back(entry.path());
      continue;
    }
    fs::path rel = fs::relative(entry.path(), root);
    if (!keep_extension) rel.replace_extension();
    files[rel.generic_string()] = fs::absolute(entry.path());
  }
  return files;
}

std::vector<RemoteDatasetEntry> load_remote_manifest(const fs::path& path) {
  std::vector<RemoteDatasetEntry> entries;
  if (!fs::exists(path)) return entries;
  const json j = json::parse(read_file(path));
  for (const auto& e : j.at("datasets")) {
    RemoteDatasetEntry r;
    r.name = e.at("name").get<std::string>();
    r.url = e.at("url").get<std::string>();
    r.sha256 = e.at("sha256").get<std::string>();
    r.description = e.value("description", "");
    if (e.contains("layout")) {
      const auto& l = e.at("layout");
      r.archive = l.value("archive", r.archive);
      r.root = l.value("root", r.root);
      r.extension = l.value("extension", r.extension);
    }
    if (!valid_dataset_name(r.name)) {
      throw Error(ErrorCode::invalid_argument, "bad dataset name in manifest: " + r.name);
    }
    entries.push_back(std::move(r));
  }
  return entries;
}

DatasetRegistry::DatasetRegistry() {
  auto add = [this](std::shared_ptr<const Dataset> d) { datasets_[d->name()] = std::move(d); };
  add(std::make_shared<GeneratorDataset>());
  add(std::make_shared<FileDataset>(
      "tinyir-suite-v0", "Handwritten tinyir programs with exhaustively searched optima",
      DatasetOrigin::builtin_suite, "tinyir",
      scan_directory(data_dir() / "tinyir-suite-v0", {".tir"}, false)));
  add(std::make_shared<FileDataset>("csuite-v0", "Small C programs for the GCC environment",
                                    DatasetOrigin::builtin_suite, "gcc",
                                    scan_directory(data_dir() / "csuite-v0", {".c"}, false)));
  reload_user();
  reload_installed();
}

void DatasetRegistry::reload_user() {
  std::map<std::string, fs::path> files;
  if (fs::exists(user_registry_path())) {
    const json j = json::parse(read_file(user_registry_path()));
    for (const auto& [rel, abs] : j.at("files").items()) files[rel] = abs.get<std::string>();
  }
  datasets_[kUserDataset] =
      std::make_shared<FileDataset>(kUserDataset, "User-supplied programs", DatasetOrigin::local_dir,
                                    "", std::move(files));
}

void DatasetRegistry::reload_installed() {
  if (!fs::is_directory(installed_root())) return;
  for (const auto& dir : fs::directory_iterator(installed_root())) {
    const fs::path manifest = dir.path() / "manifest.json";
    if (!fs::exists(manifest)) continue;
    const json m = json::parse(read_file(manifest));
    const std::string ext = m.at("layout").value("extension", ".tir");
    datasets_[m.at("name").get<std::string>()] = std::make_shared<FileDataset>(
        m.at("name").get<std::string>(), m.value("description", ""), DatasetOrigin::remote_archive,
        backend_for_extension(ext), scan_directory(dir.path() / "benchmarks", {ext}, false));
  }
}

std::vector<std::shared_ptr<const Dataset>> DatasetRegistry::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::shared_ptr<const Dataset>> out;
  for (const auto& [name, d] : datasets_) out.push_back(d);
  return out;
}

std::shared_ptr<const Dataset> DatasetRegistry::dataset(const std::string& name) const {
  std::string key = name;
  if (key.rfind("benchmark://", 0) == 0) key = BenchmarkUri::parse(key).dataset;
  std::lock_guard lock(mu_);
  const auto it = datasets_.find(key);
  if (it == datasets_.end()) throw Error(ErrorCode::unknown_dataset, name);
  return it->second;
}

Benchmark DatasetRegistry::load(const BenchmarkUri& uri) const {
  std::shared_ptr<const Dataset> d;
  {
    std::lock_guard lock(mu_);
    const auto it = datasets_.find(uri.dataset);
    if (it == datasets_.end()) throw Error(ErrorCode::unknown_benchmark, uri.str());
    d = it->second;
  }
  return d->load(uri);
}

std::shared_ptr<const Dataset> DatasetRegistry::add_local_dataset(const fs::path& directory) {
  if (!fs::is_directory(directory)) {
    throw Error(ErrorCode::empty_directory, directory.string() + " is not a directory");
  }
  std::vector<fs::path> ignored;
  const auto found = scan_directory(directory, kBenchmarkExtensions, true, &ignored);
  for (const auto& p : ignored) std::cerr << "warning: ignoring " << p.string() << "\n";
  if (found.empty()) {
    throw Error(ErrorCode::empty_directory, "no .tir or .c files under " + directory.string());
  }
  for (const auto& [rel, file] : found) {
    if (::access(file.c_str(), R_OK) != 0) throw Error(ErrorCode::unreadable_file, file.string());
  }

  std::lock_guard lock(mu_);
  FileLock file_lock(cache_dir() / "user-datasets.lock");
  json j{{"files", json::object()}};
  if (fs::exists(user_registry_path())) j = json::parse(read_file(user_registry_path()));
  for (const auto& [rel, file] : found) {
    if (j["files"].contains(rel) && j["files"][rel] != file.string()) {
      std::cerr << "warning: " << kUserDataset << "/" << rel << " now points at " << file.string()
                << "\n";
    }
    j["files"][rel] = file.string();
  }
  fs::create_directories(cache_dir());
  write_file_atomic(user_registry_path(), j.dump(2));
  reload_user();
  return datasets_.at(kUserDataset);
}

fs::path DatasetRegistry::manifest_path() const {
  if (const char* p = std::getenv("OPTGYM_DATASET_MANIFEST"); p != nullptr && *p != '\0') return p;
  return data_dir() / "remote-manifest.json";
}

std::shared_ptr<const Dataset> DatasetRegistry::install_remote(const std::string& name,
                                                               InstallStats* stats) {
  InstallStats local;
  InstallStats& st = stats != nullptr ? *stats : local;
  st = {};
  const auto entries = load_remote_manifest(manifest_path());
  const auto entry = std::find_if(entries.begin(), entries.end(),
                                  [&](const RemoteDatasetEntry& e) { return e.name == name; });
  if (entry == entries.end()) throw Error(ErrorCode::unknown_dataset, name + " is not in the manifest");

  const fs::path target = installed_root() / name;
  FileLock file_lock(installed_root() / (name + ".lock"));

  const fs::path marker = target / "manifest.json";
  if (fs::exists(marker) && json::parse(read_file(marker)).value("sha256", "") == entry->sha256) {
    std::lock_guard lock(mu_);
    reload_installed();
    return datasets_.at(name);
  }

  const fs::path store = cache_dir() / "archives";
  fs::create_directories(store);
  const fs::path archive = store / (entry->sha256 + "." + entry->archive);
  if (!fs::exists(archive) || file_sha256(archive) != entry->sha256) {
    const fs::path partial = store / (entry->sha256 + ".partial." + std::to_string(::getpid()));
    std::string last_error;
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      ++st.attempts;
      try {
        download(entry->url, partial);
        ok = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::network_failure) {
          fs::remove(partial);
          throw;
        }
        last_error = e.detail();
        if (attempt < 2) std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
      }
    }
    if (!ok) {
      fs::remove(partial);
      throw Error(ErrorCode::network_failure, last_error);
    }
    st.downloaded = true;
    const std::string actual = file_sha256(partial);
    if (actual != entry->sha256) {
      fs::remove(partial);
      throw Error(ErrorCode::checksum_mismatch, name + ": expected " + entry->sha256 + ", got " + actual);
    }
    fs::rename(partial, archive);
  }

  const fs::path staging = installed_root() / (".staging-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(staging);
  fs::create_directories(staging);
  const std::string mode = entry->archive == "tar" ? "-xf" : "-xzf";
  const RunResult r = run_process({"tar", "--no-same-owner", "--no-same-permissions", mode,
                                   archive.string(), "-C", staging.string()},
                                  {.cwd = std::nullopt, .timeout = std::chrono::minutes(10)});
  if (r.exit_code != 0) {
    fs::remove_all(staging);
    throw Error(ErrorCode::io_failure, "tar failed: " + r.err);
  }
  scrub_tree(staging);
  const fs::path programs = entry->root.empty() ? staging : staging / entry->root;
  if (!fs::is_directory(programs)) {
    fs::remove_all(staging);
    throw Error(ErrorCode::io_failure, "archive has no directory '" + entry->root + "'");
  }
  fs::remove_all(target);
  fs::create_directories(target);
  fs::rename(programs, target / "benchmarks");
  fs::remove_all(staging);

  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const json m{{"name", entry->name},
               {"url", entry->url},
               {"sha256", entry->sha256},
               {"description", entry->description},
               {"layout", {{"archive", entry->archive}, {"root", entry->root}, {"extension", entry->extension}}},
               {"installed_at", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  write_file_atomic(marker, m.dump(2));

  std::lock_guard lock(mu_);
  reload_installed();
  return datasets_.at(name);
}

DatasetRegistry& datasets() {
  static DatasetRegistry registry;
  return registry;
}

}  // namespace optgym
