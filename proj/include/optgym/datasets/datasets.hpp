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
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "optgym/datasets/uri.hpp"

namespace optgym {

enum class DatasetOrigin { builtin_suite, generator, local_dir, remote_archive };
std::string_view to_string(DatasetOrigin origin);

/// One program to optimize. Generator benchmarks carry no content: the
/// backend materializes them from the URI.
struct Benchmark {
  BenchmarkUri uri;
  std::optional<std::string> content;
};

/// SHA-256 of the benchmark's program text (generated on demand for
/// generator benchmarks).
std::string benchmark_digest(const Benchmark& benchmark);

class Dataset;

/// Lazy forward range over a dataset's URIs, by index.
class BenchmarkRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = BenchmarkUri;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = BenchmarkUri;

    iterator() = default;
    iterator(const Dataset* d, std::uint64_t i) : dataset_(d), index_(i) {}
    BenchmarkUri operator*() const;
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto old = *this;
      ++index_;
      return old;
    }
    bool operator==(const iterator& o) const { return index_ == o.index_; }

   private:
    const Dataset* dataset_ = nullptr;
    std::uint64_t index_ = 0;
  };

  BenchmarkRange(const Dataset* d, std::uint64_t n) : dataset_(d), n_(n) {}
  iterator begin() const { return {dataset_, 0}; }
  iterator end() const { return {dataset_, n_}; }

 private:
  const Dataset* dataset_;
  std::uint64_t n_;
};

class Dataset {
 public:
  virtual ~Dataset() = default;

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  DatasetOrigin origin() const { return origin_; }
  /// Environment family whose backend understands the programs ("tinyir", "gcc").
  const std::string& backend() const { return backend_; }

  virtual std::uint64_t size() const = 0;
  bool is_generator() const { return origin_ == DatasetOrigin::generator; }
  virtual BenchmarkUri benchmark_at(std::uint64_t index) const = 0;
  /// Throws Error(unknown_benchmark) or Error(unreadable_file).
  virtual Benchmark load(const BenchmarkUri& uri) const = 0;

  BenchmarkRange benchmarks() const { return {this, size()}; }

 protected:
  Dataset(std::string name, std::string description, DatasetOrigin origin, std::string backend)
      : name_(std::move(name)),
        description_(std::move(description)),
        origin_(origin),
        backend_(std::move(backend)) {}

 private:
  std::string name_;
  std::string description_;
  DatasetOrigin origin_;
  std::string backend_;
};

/// A dataset backed by files on disk, addressed by path relative to a root.
class FileDataset : public Dataset {
 public:
  /// `files` maps URI path -> file.
  FileDataset(std::string name, std::string description, DatasetOrigin origin, std::string backend,
              std::map<std::string, std::filesystem::path> files);

  std::uint64_t size() const override { return paths_.size(); }
  BenchmarkUri benchmark_at(std::uint64_t index) const override;
  Benchmark load(const BenchmarkUri& uri) const override;
  std::filesystem::path file(const BenchmarkUri& uri) const;

 private:
  std::map<std::string, std::filesystem::path> files_;
  std::vector<std::string> paths_;
};

/// benchmark://tinyir-gen-v0/seed-<n> for every 32-bit n, in seed order.
class GeneratorDataset final : public Dataset {
 public:
  GeneratorDataset();
  std::uint64_t size() const override { return std::uint64_t{1} << 32; }
  BenchmarkUri benchmark_at(std::uint64_t index) const override;
  Benchmark load(const BenchmarkUri& uri) const override;
};

/// Builds a FileDataset from every file under `root` with one of the given
/// extensions. With `keep_extension` false the URI path drops the extension.
std::map<std::string, std::filesystem::path> scan_directory(
    const std::filesystem::path& root, const std::vector<std::string>& extensions,
    bool keep_extension, std::vector<std::filesystem::path>* ignored = nullptr);

/// Extensions understood by each environment family.
inline const std::vector<std::string> kBenchmarkExtensions{".tir", ".c"};
std::string backend_for_extension(const std::string& extension);

/// Manifest entry for a downloadable dataset.
struct RemoteDatasetEntry {
  std::string name;
  std::string url;  // http://, https:// or file://
  std::string sha256;
  /// Layout: archive format ("tar.gz" or "tar"), the directory inside the
  /// archive holding the programs ("" for the archive root), and the
  /// program extension.
  std::string archive = "tar.gz";
  std::string root;
  std::string extension = ".tir";
  std::string description;
};

std::vector<RemoteDatasetEntry> load_remote_manifest(const std::filesystem::path& path);

struct InstallStats {
  bool downloaded = false;  // false when already installed
  int attempts = 0;
};

/// The dataset catalog. Builtin datasets come from data_dir(); local
/// directories added with add_local_dataset() persist in
/// $OPTGYM_CACHE/user-datasets.json; remote datasets install under
/// $OPTGYM_CACHE/datasets/<name>/.
class DatasetRegistry {
 public:
  DatasetRegistry();

  std::vector<std::shared_ptr<const Dataset>> list() const;
  /// Accepts "name-vN" or "benchmark://name-vN". Throws Error(unknown_dataset).
  std::shared_ptr<const Dataset> dataset(const std::string& name) const;
  /// Resolves a URI to its program. Throws Error(unknown_benchmark).
  Benchmark load(const BenchmarkUri& uri) const;
  Benchmark load(const std::string& uri) const { return load(BenchmarkUri::parse(uri)); }

  /// Registers every recognized file under `directory` as
  /// benchmark://user-v0/<relative-path>. Files with other extensions are
  /// skipped with a warning on stderr. Throws Error(empty_directory) when
  /// nothing is recognized and Error(unreadable_file) for unreadable files.
  std::shared_ptr<const Dataset> add_local_dataset(const std::filesystem::path& directory);

  /// Downloads, verifies and unpacks a manifest dataset. Idempotent.
  std::shared_ptr<const Dataset> install_remote(const std::string& name,
                                                InstallStats* stats = nullptr);

  /// Manifest used by install_remote: $OPTGYM_DATASET_MANIFEST, else
  /// data_dir()/remote-manifest.json.
  std::filesystem::path manifest_path() const;

 private:
  void reload_user();
  void reload_installed();

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
};

/// Process-wide registry (lazily constructed).
DatasetRegistry& datasets();

}  // namespace optgym
