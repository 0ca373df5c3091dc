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

#include "optgym/common/error.hpp"
#include "optgym/rpc/runtime.hpp"
#include "optgym/tinyir/backend.hpp"

int main(int argc, char** argv) {
  return optgym::rpc::service_main(
      argc, argv, "optgym-tinyir-service", [](const std::vector<std::string>& extra) {
        if (!extra.empty()) {
          throw optgym::Error(optgym::ErrorCode::invalid_argument,
                              "unexpected argument " + extra.front());
        }
        return optgym::tinyir::make_backend();
      });
}
