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

#include <filesystem>
#include <string>
#include <string_view>

namespace optgym {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
/// Writes through a temporary sibling and renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view contents);

/// Checked-in benchmark data ($OPTGYM_DATA_DIR overrides the build default).
fs::path data_dir();
/// Captured compiler help-text fixtures ($OPTGYM_FIXTURE_DIR overrides).
fs::path fixture_dir();
/// Writable cache root: $OPTGYM_CACHE, else $XDG_CACHE_HOME/optgym, else ~/.cache/optgym.
fs::path cache_dir();
/// Directory holding backend service executables: $OPTGYM_SERVICE_DIR, else
/// the directory of the running executable.
fs::path service_dir();

}  // namespace optgym
