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

#include "optgym/rpc/spaces.hpp"

namespace optgym::gcc {

/// How an option is spelled on the command line.
enum class OptionKind {
  o_level,     // -O<v> for each value
  flag,        // -f<name> / -fno-<name>
  flag_enum,   // -f<name>=<value>
  flag_int,    // -f<name>=<int>
  flag_align,  // -f<name> (bare form of an -f<name>= alignment option)
  param_enum,  // --param=<name>=<value>
  param_int,   // --param=<name>=<int>
};

std::string_view to_string(OptionKind kind);
OptionKind option_kind_from_string(std::string_view name);

/// One tunable option. `settings()` counts the spellings; the cardinality
/// seen by a ChoiceVector adds one for "absent".
struct Option {
  OptionKind kind = OptionKind::flag;
  std::string name;                 // without the -f / --param= prefix; "O" for o_level
  std::vector<std::string> values;  // o_level, *_enum
  std::int64_t min = 0;             // *_int
  std::int64_t max = 0;
  bool no_fno = false;  // flag without a -fno- form

  std::int64_t settings() const;
  std::int64_t cardinality() const { return settings() + 1; }
  /// "-O", "-f<name>" or "--param=<name>".
  std::string display() const;
  /// Command-line spelling of setting `k` in [0, settings()).
  std::string spelling(std::int64_t k) const;

  bool operator==(const Option&) const = default;
};

struct GccSpec {
  std::string compiler;  // specifier: executable path/name or "docker:<image>"
  std::string version;   // first line of --version
  std::vector<Option> options;

  json to_json() const;
  static GccSpec from_json(const json& j);
};

/// Parses `--help=optimizers -Q` output. The first line is a heading.
std::vector<Option> parse_optimizer_help(const std::string& text);
/// Parses `--help=params -Q` output. The first line is a heading.
std::vector<Option> parse_param_help(const std::string& text);
/// Corrections for entries whose help text is known to be wrong.
std::vector<Option> fix_options(std::vector<Option> options);

/// Builds a spec from captured help text. Throws Error(help_parse_empty).
GccSpec spec_from_help(const std::string& compiler, const std::string& version_text,
                       const std::string& optimizers_text, const std::string& params_text);
/// Reads version.txt, optimizers.txt and params.txt from `dir`.
GccSpec spec_from_fixture(const std::filesystem::path& dir);
/// Runs the compiler for its help text; "fixture:<dir>" reads captured help
/// text instead. Throws Error(compiler_not_found) or
/// Error(help_parse_empty).
GccSpec extract_space(const std::string& compiler);

/// Σ log10(cardinality).
double space_size_log10(const GccSpec& spec);
/// Σ ln(cardinality).
double space_size_ln(const GccSpec& spec);

/// A categorical action either sets an option to one spelling or moves its
/// choice by a delta, clamped to [0, cardinality).
struct CategoricalAction {
  std::size_t option = 0;
  bool is_delta = false;
  std::int64_t value = 0;  // setting index when !is_delta, else the delta
  std::string name;
};

/// Options with fewer than 10 settings get one set action per setting. Larger
/// ones get ±1, plus ±10 from 50 settings, ±100 from 500 and ±1000 from 5000.
std::vector<CategoricalAction> categorical_actions(const GccSpec& spec);
/// Number of categorical actions an option contributes.
std::int64_t action_count(std::int64_t settings);
void apply(const GccSpec& spec, const CategoricalAction& action, std::vector<std::int64_t>& choices);

/// Flags for a choice vector; absent choices emit nothing. Throws
/// Error(out_of_range_action) for a malformed vector.
std::vector<std::string> render_flags(const GccSpec& spec, const std::vector<std::int64_t>& choices);
/// Inverse of render_flags. Throws Error(invalid_argument) for unknown flags.
std::vector<std::int64_t> parse_flags(const GccSpec& spec, const std::vector<std::string>& flags);
void check_choices(const GccSpec& spec, const std::vector<std::int64_t>& choices);

/// Full argv for running the compiler with `args`. Image specifiers run via
/// the container runtime with `workdir` bind-mounted at the same path.
std::vector<std::string> compiler_command(const std::string& compiler, const std::vector<std::string>& args,
                                          const std::optional<std::filesystem::path>& workdir = std::nullopt);

}  // namespace optgym::gcc
