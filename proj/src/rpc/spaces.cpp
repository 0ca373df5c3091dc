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

#include "optgym/rpc/spaces.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "optgym/common/error.hpp"

namespace optgym {
namespace {

constexpr std::string_view kind_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::discrete: return "discrete";
    case SpaceKind::integer_box: return "integer-box";
    case SpaceKind::scalar_range: return "scalar-range";
    case SpaceKind::byte_string: return "byte-string";
    case SpaceKind::utf8_string: return "utf8-string";
    case SpaceKind::int64_vector: return "int64-vector";
    case SpaceKind::composite: return "composite";
  }
  return "?";
}

SpaceKind kind_from_name(std::string_view name) {
  for (SpaceKind k : {SpaceKind::discrete, SpaceKind::integer_box, SpaceKind::scalar_range,
                      SpaceKind::byte_string, SpaceKind::utf8_string, SpaceKind::int64_vector,
                      SpaceKind::composite}) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::protocol_error, "unknown space kind " + std::string(name));
}

Error invalid(const SpaceDescriptor& s, const std::string& why) {
  return Error(ErrorCode::invalid_argument, "space " + s.id + ": " + why);
}

}  // namespace

void SpaceDescriptor::validate() const {
  switch (kind) {
    case SpaceKind::discrete:
      if (n < 1) throw invalid(*this, "discrete space needs n >= 1");
      if (!names.empty() && static_cast<std::int64_t>(names.size()) != n) {
        throw invalid(*this, "label count differs from n");
      }
      break;
    case SpaceKind::integer_box:
      if (lower.size() != upper.size()) throw invalid(*this, "bound length mismatch");
      for (std::size_t i = 0; i < lower.size(); ++i) {
        if (lower[i] > upper[i]) throw invalid(*this, "lower > upper at " + std::to_string(i));
      }
      break;
    case SpaceKind::int64_vector:
      if (length < 1) throw invalid(*this, "vector length must be >= 1");
      break;
    case SpaceKind::composite:
      validate_space_list(members);
      break;
    default:
      break;
  }
}

SpaceDescriptor SpaceDescriptor::discrete_space(std::string id, std::vector<std::string> names) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::discrete;
  s.n = static_cast<std::int64_t>(names.size());
  s.names = std::move(names);
  return s;
}

SpaceDescriptor SpaceDescriptor::box(std::string id, std::vector<std::int64_t> lower,
                                     std::vector<std::int64_t> upper) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::integer_box;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

SpaceDescriptor SpaceDescriptor::scalar(std::string id, double lo, double hi, bool deterministic,
                                        bool platform_dependent) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::scalar_range;
  s.lo = lo;
  s.hi = hi;
  s.deterministic = deterministic;
  s.platform_dependent = platform_dependent;
  return s;
}

SpaceDescriptor SpaceDescriptor::text(std::string id) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::utf8_string;
  return s;
}

SpaceDescriptor SpaceDescriptor::bytes(std::string id) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::byte_string;
  return s;
}

SpaceDescriptor SpaceDescriptor::vector(std::string id, std::int64_t length) {
  SpaceDescriptor s;
  s.display_name = id;
  s.id = std::move(id);
  s.kind = SpaceKind::int64_vector;
  s.length = length;
  return s;
}

void validate_space_list(const std::vector<SpaceDescriptor>& spaces) {
  std::set<std::string> ids;
  for (const auto& s : spaces) {
    s.validate();
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate space id " + s.id);
    }
  }
}

const SpaceDescriptor* find_space(const std::vector<SpaceDescriptor>& spaces, std::string_view id) {
  for (const auto& s : spaces) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void to_json(json& j, const SpaceDescriptor& s) {
  j = json{{"id", s.id}, {"display_name", s.display_name}, {"kind", kind_name(s.kind)}};
  switch (s.kind) {
    case SpaceKind::discrete:
      j["n"] = s.n;
      if (!s.names.empty()) j["names"] = s.names;
      break;
    case SpaceKind::integer_box:
      j["lower"] = s.lower;
      j["upper"] = s.upper;
      break;
    case SpaceKind::scalar_range:
      j["lo"] = s.lo;
      j["hi"] = s.hi;
      j["deterministic"] = s.deterministic;
      j["platform_dependent"] = s.platform_dependent;
      break;
    case SpaceKind::int64_vector:
      j["length"] = s.length;
      break;
    case SpaceKind::composite:
      j["members"] = s.members;
      break;
    default:
      break;
  }
}

void from_json(const json& j, SpaceDescriptor& s) {
  s = SpaceDescriptor{};
  s.id = j.at("id").get<std::string>();
  s.display_name = j.value("display_name", s.id);
  s.kind = kind_from_name(j.at("kind").get<std::string>());
  s.n = j.value("n", std::int64_t{0});
  s.names = j.value("names", std::vector<std::string>{});
  s.lower = j.value("lower", std::vector<std::int64_t>{});
  s.upper = j.value("upper", std::vector<std::int64_t>{});
  s.lo = j.value("lo", 0.0);
  s.hi = j.value("hi", 0.0);
  s.deterministic = j.value("deterministic", true);
  s.platform_dependent = j.value("platform_dependent", false);
  s.length = j.value("length", std::int64_t{0});
  if (j.contains("members")) s.members = j.at("members").get<std::vector<SpaceDescriptor>>();
}

json observation_to_json(const ObservationValue& value) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) return {{"int64", v}};
        if constexpr (std::is_same_v<T, double>) return {{"double", v}};
        if constexpr (std::is_same_v<T, std::string>) return {{"string", v}};
        if constexpr (std::is_same_v<T, Bytes>) return {{"bytes", base64_encode(v)}};
        if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) return {{"int64_vector", v}};
      },
      value);
}

ObservationValue observation_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw Error(ErrorCode::protocol_error, "bad observation");
  const auto& [key, v] = *j.items().begin();
  if (key == "int64") return v.get<std::int64_t>();
  if (key == "double") return v.get<double>();
  if (key == "string") return v.get<std::string>();
  if (key == "bytes") return base64_decode(v.get<std::string>());
  if (key == "int64_vector") return v.get<std::vector<std::int64_t>>();
  throw Error(ErrorCode::protocol_error, "unknown observation type " + key);
}

double observation_scalar(const ObservationValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  throw Error(ErrorCode::invalid_argument, "observation is not a scalar");
}

std::string observation_to_string(const ObservationValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, Bytes>) {
          return "<" + std::to_string(v.size()) + " bytes>";
        } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
          return json(v).dump();
        } else {
          return json(v).dump();
        }
      },
      value);
}

json action_to_json(const Action& action) {
  return std::visit([](const auto& v) { return json(v); }, action);
}

Action action_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_array()) return j.get<std::vector<std::int64_t>>();
  throw Error(ErrorCode::protocol_error, "bad action " + j.dump());
}

void check_action(const SpaceDescriptor& space, const Action& action) {
  if (space.kind == SpaceKind::discrete) {
    const auto* i = std::get_if<std::int64_t>(&action);
    if (i == nullptr || *i < 0 || *i >= space.n) {
      throw Error(ErrorCode::out_of_range_action,
                  action_to_json(action).dump() + " not in [0, " + std::to_string(space.n) + ")");
    }
    return;
  }
  if (space.kind == SpaceKind::integer_box) {
    const auto* v = std::get_if<std::vector<std::int64_t>>(&action);
    if (v == nullptr || v->size() != space.lower.size()) {
      throw Error(ErrorCode::out_of_range_action, "expected a vector of length " +
                                                      std::to_string(space.lower.size()));
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      if ((*v)[i] < space.lower[i] || (*v)[i] > space.upper[i]) {
        throw Error(ErrorCode::out_of_range_action, "element " + std::to_string(i) + " = " +
                                                        std::to_string((*v)[i]) + " out of bounds");
      }
    }
    return;
  }
  throw Error(ErrorCode::out_of_range_action, "space " + space.id + " does not accept actions");
}

std::string action_name(const SpaceDescriptor& space, const Action& action) {
  if (const auto* i = std::get_if<std::int64_t>(&action)) {
    if (*i >= 0 && static_cast<std::size_t>(*i) < space.names.size()) {
      return space.names[static_cast<std::size_t>(*i)];
    }
    return "#" + std::to_string(*i);
  }
  const auto& v = std::get<std::vector<std::int64_t>>(action);
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out + "]";
}

Action action_from_name(const SpaceDescriptor& space, std::string_view name) {
  if (space.kind == SpaceKind::discrete) {
    for (std::size_t i = 0; i < space.names.size(); ++i) {
      if (space.names[i] == name) return static_cast<std::int64_t>(i);
    }
    if (name.size() > 1 && name[0] == '#') {
      std::int64_t i = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), i);
      if (ec == std::errc() && ptr == name.data() + name.size() && i >= 0 && i < space.n) return i;
    }
    throw Error(ErrorCode::out_of_range_action, "unknown action '" + std::string(name) + "'");
  }
  if (space.kind == SpaceKind::integer_box && name.size() >= 2 && name.front() == '[' &&
      name.back() == ']') {
    try {
      Action action = json::parse(name).get<std::vector<std::int64_t>>();
      check_action(space, action);
      return action;
    } catch (const json::exception&) {
    }
  }
  throw Error(ErrorCode::out_of_range_action, "unknown action '" + std::string(name) + "'");
}

}  // namespace optgym
