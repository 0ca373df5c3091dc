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

#include "optgym/gcc/spec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "optgym/common/error.hpp"
#include "optgym/common/files.hpp"
#include "optgym/common/subprocess.hpp"

namespace optgym::gcc {
namespace {

constexpr std::int64_t kUnboundedMax = std::int64_t{1} << 31;

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Body lines of help output; the first line is a heading.
std::vector<std::string> body_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    lines.push_back(trim(line));
  }
  return lines;
}

std::vector<std::string> split_bar(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto bar = s.find('|', start);
    out.push_back(s.substr(start, bar - start));
    if (bar == std::string::npos) return out;
    start = bar + 1;
  }
}

bool is_int(const std::string& s) {
  static const std::regex pat("[+-]?[0-9]+");
  return std::regex_match(s, pat);
}

Option make(OptionKind kind, std::string name) {
  Option o;
  o.kind = kind;
  o.name = std::move(name);
  return o;
}

Option make_int(OptionKind kind, std::string name, std::int64_t min, std::int64_t max) {
  Option o = make(kind, std::move(name));
  o.min = min;
  o.max = max;
  return o;
}

Option make_enum(OptionKind kind, std::string name, std::vector<std::string> values) {
  Option o = make(kind, std::move(name));
  o.values = std::move(values);
  return o;
}

std::vector<Option> sorted_values(std::map<std::string, Option> options) {
  std::vector<Option> out;
  out.reserve(options.size());
  for (auto& [_, o] : options) out.push_back(std::move(o));
  return out;
}

}  // namespace

std::string_view to_string(OptionKind kind) {
  switch (kind) {
    case OptionKind::o_level: return "o-level";
    case OptionKind::flag: return "flag";
    case OptionKind::flag_enum: return "flag-enum";
    case OptionKind::flag_int: return "flag-int";
    case OptionKind::flag_align: return "flag-align";
    case OptionKind::param_enum: return "param-enum";
    case OptionKind::param_int: return "param-int";
  }
  return "?";
}

OptionKind option_kind_from_string(std::string_view name) {
  for (auto k : {OptionKind::o_level, OptionKind::flag, OptionKind::flag_enum, OptionKind::flag_int,
                 OptionKind::flag_align, OptionKind::param_enum, OptionKind::param_int}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown option kind " + std::string(name));
}

std::int64_t Option::settings() const {
  switch (kind) {
    case OptionKind::o_level:
    case OptionKind::flag_enum:
    case OptionKind::param_enum: return static_cast<std::int64_t>(values.size());
    case OptionKind::flag: return no_fno ? 1 : 2;
    case OptionKind::flag_align: return 1;
    case OptionKind::flag_int:
    case OptionKind::param_int: return max - min + 1;
  }
  return 0;
}

std::string Option::display() const {
  switch (kind) {
    case OptionKind::o_level: return "-O";
    case OptionKind::param_enum:
    case OptionKind::param_int: return "--param=" + name;
    default: return "-f" + name;
  }
}

std::string Option::spelling(std::int64_t k) const {
  if (k < 0 || k >= settings()) {
    throw Error(ErrorCode::out_of_range_action, display() + " has no setting " + std::to_string(k));
  }
  const auto idx = static_cast<std::size_t>(k);
  switch (kind) {
    case OptionKind::o_level: return "-O" + values[idx];
    case OptionKind::flag: return k == 0 ? "-f" + name : "-fno-" + name;
    case OptionKind::flag_enum: return "-f" + name + "=" + values[idx];
    case OptionKind::flag_int: return "-f" + name + "=" + std::to_string(min + k);
    case OptionKind::flag_align: return "-f" + name;
    case OptionKind::param_enum: return "--param=" + name + "=" + values[idx];
    case OptionKind::param_int: return "--param=" + name + "=" + std::to_string(min + k);
  }
  return {};
}

json GccSpec::to_json() const {
  json opts = json::array();
  for (const auto& o : options) {
    json j{{"name", o.name}, {"kind", to_string(o.kind)}, {"cardinality", o.cardinality()}};
    if (!o.values.empty()) j["values"] = o.values;
    if (o.kind == OptionKind::flag_int || o.kind == OptionKind::param_int) {
      j["min"] = o.min;
      j["max"] = o.max;
    }
    if (o.no_fno) j["no_fno"] = true;
    opts.push_back(std::move(j));
  }
  return {{"compiler", compiler}, {"version", version}, {"options", std::move(opts)}};
}

GccSpec GccSpec::from_json(const json& j) {
  GccSpec spec;
  spec.compiler = j.at("compiler").get<std::string>();
  spec.version = j.at("version").get<std::string>();
  for (const auto& o : j.at("options")) {
    Option opt = make(option_kind_from_string(o.at("kind").get<std::string>()), o.at("name").get<std::string>());
    opt.values = o.value("values", std::vector<std::string>{});
    opt.min = o.value("min", std::int64_t{0});
    opt.max = o.value("max", std::int64_t{0});
    opt.no_fno = o.value("no_fno", false);
    spec.options.push_back(std::move(opt));
  }
  return spec;
}

std::vector<Option> parse_optimizer_help(const std::string& text) {
  static const std::regex o_num("-O<number>");
  static const std::regex o_pat("-O([a-z]+)");
  static const std::regex align_pat("-f(align-[-a-z]+)=");
  static const std::regex flag_pat("-f([-a-z0-9]+)");
  static const std::regex enum_pat("-f([-a-z0-9]+)=\\[([-A-Za-z_|]+)\\]");
  static const std::regex interval_pat("-f([-a-z0-9]+)=<([0-9]+),([0-9]+)>");
  static const std::regex number_pat("-f([-a-z0-9]+)=<number>");

  std::map<std::string, Option> options;
  auto add_o = [&](const std::string& v) {
    auto [it, _] = options.try_emplace("O", make(OptionKind::o_level, "O"));
    it->second.values.push_back(v);
  };
  // Plain flags never replace a richer entry of the same name; the others do.
  for (const auto& line : body_lines(text)) {
    const auto bits = split_ws(line);
    if (bits.empty()) continue;
    const std::string& spec = bits[0];
    std::smatch m;
    if (std::regex_match(spec, o_num)) {
      for (int i = 0; i < 4; ++i) add_o(std::to_string(i));
    } else if (std::regex_match(spec, m, o_pat)) {
      add_o(m[1]);
    } else if (std::regex_match(spec, m, align_pat)) {
      options.insert_or_assign(m[1], make(OptionKind::flag_align, m[1]));
    } else if (std::regex_match(spec, m, flag_pat)) {
      options.try_emplace(m[1], make(OptionKind::flag, m[1]));
    } else if (std::regex_match(spec, m, enum_pat)) {
      options.insert_or_assign(m[1], make_enum(OptionKind::flag_enum, m[1], split_bar(m[2])));
    } else if (std::regex_match(spec, m, interval_pat)) {
      options.insert_or_assign(m[1], make_int(OptionKind::flag_int, m[1], std::stoll(m[2]), std::stoll(m[3])));
    } else if (std::regex_match(spec, m, number_pat)) {
      options.insert_or_assign(m[1], make_int(OptionKind::flag_int, m[1], 0, kUnboundedMax));
    }
  }
  return sorted_values(std::move(options));
}

std::vector<Option> parse_param_help(const std::string& text) {
  static const std::regex enum_pat("--param=([-a-zA-Z0-9]+)=\\[([-A-Za-z_|]+)\\]");
  static const std::regex interval_pat("--param=([-a-zA-Z0-9]+)=<(-?[0-9]+),([0-9]+)>");
  static const std::regex number_pat("--param=([-a-zA-Z0-9]+)=");
  static const std::regex old_pat(
      "([-a-zA-Z0-9]+)\\s+default\\s+(-?\\d+)\\s+minimum\\s+(-?\\d+)\\s+maximum\\s+(-?\\d+)");

  std::map<std::string, Option> params;
  for (const auto& line : body_lines(text)) {
    const auto bits = split_ws(line);
    if (bits.size() < 2) continue;
    const std::string& spec = bits[0];
    const std::string& dflt = bits[1];
    std::smatch m;
    if (std::regex_match(spec, m, enum_pat)) {
      params.insert_or_assign(m[1], make_enum(OptionKind::param_enum, m[1], split_bar(m[2])));
      continue;
    }
    if (std::regex_match(spec, m, interval_pat) && is_int(dflt)) {
      params.insert_or_assign(m[1], make_int(OptionKind::param_int, m[1], std::stoll(m[2]), std::stoll(m[3])));
      continue;
    }
    if (std::regex_match(spec, m, number_pat) && is_int(dflt)) {
      const std::int64_t d = std::stoll(dflt);
      params.insert_or_assign(m[1], make_int(OptionKind::param_int, m[1], std::min<std::int64_t>(0, d), kUnboundedMax));
      continue;
    }
    if (std::regex_match(line, m, old_pat)) {
      const std::int64_t d = std::stoll(m[2]), lo = std::stoll(m[3]), hi = std::stoll(m[4]);
      if (lo <= d && d <= hi) params.insert_or_assign(m[1], make_int(OptionKind::param_int, m[1], lo, hi));
    }
  }
  return sorted_values(std::move(params));
}

std::vector<Option> fix_options(std::vector<Option> options) {
  std::erase_if(options, [](const Option& o) { return o.kind == OptionKind::flag_enum && o.name == "live-patching"; });
  for (auto& o : options) {
    if (o.kind == OptionKind::param_int) {
      // Documented as accepting -1, rejected in practice.
      if (o.name == "logical-op-non-short-circuit" || o.name == "prefetch-minimum-stride" ||
          o.name == "sched-autopref-queue-depth" || o.name == "vect-max-peeling-for-alignment") {
        o.min = 0;
      }
    } else if (o.kind == OptionKind::flag) {
      if (o.name == "handle-exceptions") o.name = "exceptions";
      if (o.name == "stack-protector-all" || o.name == "stack-protector-explicit" ||
          o.name == "stack-protector-strong") {
        o.no_fno = true;
      }
      if (o.name == "no-threadsafe-statics") o.name = "threadsafe-statics";
    } else if (o.kind == OptionKind::flag_int && o.name == "pack-struct") {
      o = make_enum(OptionKind::flag_enum, "pack-struct", {"1", "2", "4", "8", "16"});
    }
  }
  // Renaming can leave two entries with one spelling; keep the first.
  std::set<std::string> seen;
  std::erase_if(options, [&](const Option& o) { return !seen.insert(o.display()).second; });
  return options;
}

GccSpec spec_from_help(const std::string& compiler, const std::string& version_text,
                       const std::string& optimizers_text, const std::string& params_text) {
  GccSpec spec;
  spec.compiler = compiler;
  spec.version = trim(version_text.substr(0, version_text.find('\n')));
  auto options = parse_optimizer_help(optimizers_text);
  auto params = parse_param_help(params_text);
  options.insert(options.end(), std::make_move_iterator(params.begin()), std::make_move_iterator(params.end()));
  spec.options = fix_options(std::move(options));
  if (spec.options.empty()) {
    throw Error(ErrorCode::help_parse_empty, "no options recognized in the help output of " + compiler);
  }
  return spec;
}

GccSpec spec_from_fixture(const std::filesystem::path& dir) {
  return spec_from_help("fixture:" + dir.string(), read_file(dir / "version.txt"),
                        read_file(dir / "optimizers.txt"), read_file(dir / "params.txt"));
}

GccSpec extract_space(const std::string& compiler) {
  constexpr std::string_view kFixture = "fixture:";
  if (compiler.starts_with(kFixture)) {
    const fs::path dir = compiler.substr(kFixture.size());
    if (!fs::is_directory(dir)) throw Error(ErrorCode::compiler_not_found, "no fixture directory " + dir.string());
    return spec_from_fixture(dir);
  }
  auto run = [&](const std::vector<std::string>& args) {
    RunResult r;
    try {
      r = run_process(compiler_command(compiler, args), {.cwd = std::nullopt, .timeout = std::chrono::seconds(60)});
    } catch (const Error& e) {
      throw Error(ErrorCode::compiler_not_found, compiler + ": " + e.detail());
    }
    if (r.exit_code != 0) {
      throw Error(ErrorCode::compiler_not_found, compiler + " exited with status " + std::to_string(r.exit_code));
    }
    return r.out;
  };
  const std::string version = run({"--version"});
  return spec_from_help(compiler, version, run({"--help=optimizers", "-Q"}), run({"--help=params", "-Q"}));
}

double space_size_log10(const GccSpec& spec) {
  double sum = 0;
  for (const auto& o : spec.options) sum += std::log10(static_cast<double>(o.cardinality()));
  return sum;
}

double space_size_ln(const GccSpec& spec) {
  double sum = 0;
  for (const auto& o : spec.options) sum += std::log(static_cast<double>(o.cardinality()));
  return sum;
}

std::int64_t action_count(std::int64_t settings) {
  if (settings < 10) return settings;
  std::int64_t n = 0;
  for (std::int64_t threshold : {10, 50, 500, 5000}) {
    if (settings >= threshold) n += 2;
  }
  return n;
}

std::vector<CategoricalAction> categorical_actions(const GccSpec& spec) {
  std::vector<CategoricalAction> actions;
  for (std::size_t i = 0; i < spec.options.size(); ++i) {
    const Option& o = spec.options[i];
    const std::int64_t n = o.settings();
    if (n < 10) {
      for (std::int64_t k = 0; k < n; ++k) actions.push_back({i, false, k, o.spelling(k)});
      continue;
    }
    const std::pair<std::int64_t, std::int64_t> tiers[] = {{10, 1}, {50, 10}, {500, 100}, {5000, 1000}};
    for (const auto& [threshold, delta] : tiers) {
      if (n < threshold) break;
      actions.push_back({i, true, delta, o.display() + "[+" + std::to_string(delta) + "]"});
      actions.push_back({i, true, -delta, o.display() + "[-" + std::to_string(delta) + "]"});
    }
  }
  return actions;
}

void apply(const GccSpec& spec, const CategoricalAction& action, std::vector<std::int64_t>& choices) {
  const Option& o = spec.options.at(action.option);
  std::int64_t& c = choices.at(action.option);
  if (action.is_delta) {
    c = std::clamp<std::int64_t>(c + action.value, 0, o.settings());
  } else {
    c = action.value + 1;
  }
}

void check_choices(const GccSpec& spec, const std::vector<std::int64_t>& choices) {
  if (choices.size() != spec.options.size()) {
    throw Error(ErrorCode::out_of_range_action, "choice vector has " + std::to_string(choices.size()) +
                                                    " entries, expected " + std::to_string(spec.options.size()));
  }
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i] < 0 || choices[i] >= spec.options[i].cardinality()) {
      throw Error(ErrorCode::out_of_range_action,
                  spec.options[i].display() + " choice " + std::to_string(choices[i]) + " out of range");
    }
  }
}

std::vector<std::string> render_flags(const GccSpec& spec, const std::vector<std::int64_t>& choices) {
  check_choices(spec, choices);
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i] > 0) flags.push_back(spec.options[i].spelling(choices[i] - 1));
  }
  return flags;
}

std::vector<std::int64_t> parse_flags(const GccSpec& spec, const std::vector<std::string>& flags) {
  std::map<std::string, std::pair<std::size_t, std::int64_t>> exact;
  std::map<std::string, std::size_t> numeric;  // "<prefix>=" of integer options
  for (std::size_t i = 0; i < spec.options.size(); ++i) {
    const Option& o = spec.options[i];
    if (o.kind == OptionKind::flag_int || o.kind == OptionKind::param_int) {
      numeric[o.display() + "="] = i;
    } else {
      for (std::int64_t k = 0; k < o.settings(); ++k) exact[o.spelling(k)] = {i, k};
    }
  }
  std::vector<std::int64_t> choices(spec.options.size(), 0);
  for (const auto& flag : flags) {
    if (const auto it = exact.find(flag); it != exact.end()) {
      choices[it->second.first] = it->second.second + 1;
      continue;
    }
    const auto eq = flag.rfind('=');
    const auto it = eq == std::string::npos ? numeric.end() : numeric.find(flag.substr(0, eq + 1));
    if (it == numeric.end() || !is_int(flag.substr(eq + 1))) {
      throw Error(ErrorCode::invalid_argument, "not an option of this compiler: " + flag);
    }
    const Option& o = spec.options[it->second];
    const std::int64_t v = std::stoll(flag.substr(eq + 1));
    if (v < o.min || v > o.max) throw Error(ErrorCode::invalid_argument, flag + " out of range");
    choices[it->second] = v - o.min + 1;
  }
  return choices;
}

std::vector<std::string> compiler_command(const std::string& compiler, const std::vector<std::string>& args,
                                          const std::optional<std::filesystem::path>& workdir) {
  std::vector<std::string> argv;
  constexpr std::string_view kDocker = "docker:";
  if (compiler.starts_with(kDocker)) {
    argv = {"docker", "run", "--rm"};
    if (workdir) {
      const std::string dir = workdir->string();
      argv.insert(argv.end(), {"-v", dir + ":" + dir, "-w", dir});
    }
    argv.push_back(compiler.substr(kDocker.size()));
    argv.push_back("gcc");
  } else {
    argv.push_back(compiler);
  }
  argv.insert(argv.end(), args.begin(), args.end());
  return argv;
}

}  // namespace optgym::gcc
