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

// Writes <data>/tinyir-suite-v0/optima.json from the exhaustive oracle.
// Usage: suite_optima [suite-dir]

#include <filesystem>
#include <iostream>

#include "json.hpp"
#include "optgym/common/files.hpp"
#include "optgym/tinyir/passes.hpp"
#include "oracles/phase_order_oracle.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : optgym::data_dir() / "tinyir-suite-v0";
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".tir") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto program = optgym::tinyir::parse(optgym::read_file(f));
    const auto opt = optgym::oracle::exhaustive_optimum(program, 6);
    std::vector<std::string> names;
    for (int a : opt.actions) names.emplace_back(optgym::tinyir::pass_name(optgym::tinyir::kPassCatalog[a]));
    out[f.stem().string()] = {{"initial", opt.initial},
                              {"optimum", opt.best},
                              {"baseline", optgym::tinyir::baseline_cost(program)},
                              {"actions", names}};
    std::cerr << f.stem().string() << ": " << opt.initial << " -> " << opt.best << " ("
              << opt.states << " states)\n";
  }
  optgym::write_file_atomic(dir / "optima.json", out.dump(2) + "\n");
}
