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

#include "CLI11.hpp"

#include "optgym/common/error.hpp"
#include "optgym/gcc/backend.hpp"
#include "optgym/rpc/runtime.hpp"

int main(int argc, char** argv) {
  return optgym::rpc::service_main(
      argc, argv, "optgym-gcc-service", [](const std::vector<std::string>& extra) {
        CLI::App app("gcc backend options");
        std::string compiler = "gcc";
        int jobs = 0;
        int timeout = 60;
        app.add_option("--compiler", compiler, "executable path/name or docker:<image>");
        app.add_option("--jobs", jobs, "parallel compiler invocations (0: CPU count)");
        app.add_option("--compile-timeout", timeout, "seconds per compiler invocation")->check(CLI::PositiveNumber);
        std::vector<std::string> args(extra.rbegin(), extra.rend());
        try {
          app.parse(args);
        } catch (const CLI::ParseError& e) {
          throw optgym::Error(optgym::ErrorCode::invalid_argument, e.what());
        }
        auto spec = optgym::gcc::extract_space(compiler);
        auto measurer = std::make_shared<optgym::gcc::Measurer>(compiler, jobs, std::chrono::seconds(timeout));
        return optgym::gcc::make_backend(std::move(spec), std::move(measurer));
      });
}
