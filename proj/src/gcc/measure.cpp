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

#include "optgym/gcc/measure.hpp"

#include <cstdlib>
#include <thread>

#include "optgym/common/codec.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/subprocess.hpp"

namespace optgym::gcc {
namespace {

constexpr char kSourceName[] = "input.c";

const char* output_name(SizeTarget target) { return target == SizeTarget::asm_size ? "output.s" : "output.o"; }

class ScratchDir {
 public:
  ScratchDir() {
    const fs::path root = cache_dir() / "gcc-scratch";
    fs::create_directories(root);
    std::string tmpl = (root / "XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw Error(ErrorCode::io_failure, "cannot create scratch dir");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

Measurer::Measurer(std::string compiler, int jobs, std::chrono::seconds timeout)
    : compiler_(std::move(compiler)), timeout_(timeout) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  slots_ = std::make_unique<std::counting_semaphore<>>(jobs);
}

std::vector<std::string> Measurer::command(const std::vector<std::string>& flags, const fs::path& dir,
                                           SizeTarget target) const {
  std::vector<std::string> args = flags;
  args.insert(args.end(), {"-w", target == SizeTarget::asm_size ? "-S" : "-c", (dir / kSourceName).string(),
                           "-o", (dir / output_name(target)).string()});
  return compiler_command(compiler_, args, dir);
}

Measurer::Result Measurer::compile(const std::vector<std::string>& flags, const std::string& source,
                                   SizeTarget target) {
  ScratchDir dir;
  write_file_atomic(dir.path() / kSourceName, source);
  slots_->acquire();
  RunResult r;
  try {
    {
      std::lock_guard lock(mu_);
      ++stats_.invocations;
    }
    r = run_process(command(flags, dir.path(), target), {.cwd = dir.path(), .timeout = timeout_});
  } catch (const Error& e) {
    slots_->release();
    return Error(ErrorCode::compiler_not_found, e.detail());
  }
  slots_->release();
  if (r.timed_out) {
    return Error(ErrorCode::compile_timeout, "compiler exceeded " + std::to_string(timeout_.count()) + " s");
  }
  const fs::path out = dir.path() / output_name(target);
  if (r.exit_code != 0 || !fs::exists(out)) {
    std::string detail = r.err.substr(0, 2000);
    return Error(ErrorCode::compile_error, "exit status " + std::to_string(r.exit_code) + ": " + detail);
  }
  return static_cast<std::int64_t>(fs::file_size(out));
}

std::int64_t Measurer::measure(const std::vector<std::string>& flags, const std::string& source,
                               const std::string& source_digest, SizeTarget target) {
  std::string key = source_digest + (target == SizeTarget::asm_size ? "\nasm" : "\nobj");
  for (const auto& f : flags) key += "\n" + f;
  std::optional<Result> result;
  {
    std::lock_guard lock(mu_);
    if (const auto it = cache_.find(key); it != cache_.end()) {
      ++stats_.hits;
      result = it->second;
    } else {
      ++stats_.misses;
    }
  }
  if (!result) {
    result = compile(flags, source, target);
    // A failure to run the compiler at all says nothing about these flags.
    const auto* err = std::get_if<Error>(&*result);
    if (err == nullptr || err->code() != ErrorCode::compiler_not_found) {
      std::lock_guard lock(mu_);
      cache_.insert_or_assign(key, *result);
    }
  }
  if (const auto* err = std::get_if<Error>(&*result)) throw *err;
  return std::get<std::int64_t>(*result);
}

MeasureStats Measurer::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace optgym::gcc
