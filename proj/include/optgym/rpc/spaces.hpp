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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "optgym/common/codec.hpp"

namespace optgym {

using json = nlohmann::json;

enum class SpaceKind {
  discrete,
  integer_box,
  scalar_range,
  byte_string,
  utf8_string,
  int64_vector,
  composite,
};

/// Self-describing space metadata exchanged between service and client.
struct SpaceDescriptor {
  std::string id;
  std::string display_name;
  SpaceKind kind = SpaceKind::discrete;

  // discrete
  std::int64_t n = 0;
  std::vector<std::string> names;  // optional per-index labels
  // integer_box
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;
  // scalar_range
  double lo = 0;
  double hi = 0;
  bool deterministic = true;
  bool platform_dependent = false;
  // int64_vector
  std::int64_t length = 0;
  // composite
  std::vector<SpaceDescriptor> members;

  /// Throws Error(invalid_argument) when an invariant is violated.
  void validate() const;

  static SpaceDescriptor discrete_space(std::string id, std::vector<std::string> names);
  static SpaceDescriptor box(std::string id, std::vector<std::int64_t> lower,
                             std::vector<std::int64_t> upper);
  static SpaceDescriptor scalar(std::string id, double lo, double hi, bool deterministic = true,
                                bool platform_dependent = false);
  static SpaceDescriptor text(std::string id);
  static SpaceDescriptor bytes(std::string id);
  static SpaceDescriptor vector(std::string id, std::int64_t length);

  bool operator==(const SpaceDescriptor&) const = default;
};

/// Ids must be unique within one list.
void validate_space_list(const std::vector<SpaceDescriptor>& spaces);
const SpaceDescriptor* find_space(const std::vector<SpaceDescriptor>& spaces, std::string_view id);

void to_json(json& j, const SpaceDescriptor& s);
void from_json(const json& j, SpaceDescriptor& s);

/// One observation value. Encoded on the wire as a single-key object whose key
/// names the alternative: {"int64": 3}, {"double": 0.5}, {"string": "..."},
/// {"bytes": "<base64>"}, {"int64_vector": [..]}.
using ObservationValue =
    std::variant<std::int64_t, double, std::string, Bytes, std::vector<std::int64_t>>;

json observation_to_json(const ObservationValue& value);
ObservationValue observation_from_json(const json& j);
/// Numeric view of a scalar observation (int64 or double); throws otherwise.
double observation_scalar(const ObservationValue& value);
std::string observation_to_string(const ObservationValue& value);

/// An action is an index into a discrete space, or a full vector for an
/// integer-box space. Encoded as a JSON number or array.
using Action = std::variant<std::int64_t, std::vector<std::int64_t>>;

json action_to_json(const Action& action);
Action action_from_json(const json& j);

/// Name recorded in action histories: the discrete label (or "#<index>" when the
/// space has none), or "[v0,v1,...]" for box actions.
std::string action_name(const SpaceDescriptor& space, const Action& action);
/// Inverse of action_name. Throws Error(out_of_range_action) for unknown names.
Action action_from_name(const SpaceDescriptor& space, std::string_view name);
/// Throws Error(out_of_range_action) unless `action` is a member of `space`.
void check_action(const SpaceDescriptor& space, const Action& action);

}  // namespace optgym
