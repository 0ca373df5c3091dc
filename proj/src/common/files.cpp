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

#include "optgym/common/files.hpp"

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "optgym/common/error.hpp"

#ifndef OPTGYM_DEFAULT_DATA_DIR
#define OPTGYM_DEFAULT_DATA_DIR "data"
#endif
#ifndef OPTGYM_DEFAULT_FIXTURE_DIR
#define OPTGYM_DEFAULT_FIXTURE_DIR "fixtures"
#endif

namespace optgym {
namespace {

fs::path env_or(const char* name, const fs::path& fallback) {
  const char* value = std::getenv(name);
  if (value != nullptr && *value != '\0') return value;
  return fallback;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::unreadable_file, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::unreadable_file, path.string());
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::io_failure, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path data_dir() { return env_or("OPTGYM_DATA_DIR", OPTGYM_DEFAULT_DATA_DIR); }

fs::path fixture_dir() { return env_or("OPTGYM_FIXTURE_DIR", OPTGYM_DEFAULT_FIXTURE_DIR); }

fs::path cache_dir() {
  if (const char* v = std::getenv("OPTGYM_CACHE"); v != nullptr && *v != '\0') return v;
  if (const char* v = std::getenv("XDG_CACHE_HOME"); v != nullptr && *v != '\0') {
    return fs::path(v) / "optgym";
  }
  if (const char* v = std::getenv("HOME"); v != nullptr && *v != '\0') {
    return fs::path(v) / ".cache" / "optgym";
  }
  return fs::temp_directory_path() / "optgym-cache";
}

fs::path service_dir() {
  if (const char* v = std::getenv("OPTGYM_SERVICE_DIR"); v != nullptr && *v != '\0') return v;
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return self.parent_path();
  return fs::current_path();
}

}  // namespace optgym
