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

#include "optgym/tinyir/backend.hpp"

#include <limits>

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"
#include "optgym/datasets/uri.hpp"
#include "optgym/tinyir/generator.hpp"
#include "optgym/tinyir/ir.hpp"
#include "optgym/tinyir/passes.hpp"

namespace optgym::tinyir {
namespace {

using rpc::ActionOutcome;
using rpc::LoadedBenchmark;

constexpr char kGeneratorDataset[] = "tinyir-gen-v0";

struct LoadedProgram : LoadedBenchmark {
  Program program;
  std::int64_t baseline = 0;
};

std::optional<std::uint32_t> generator_seed(const std::string& uri) {
  const BenchmarkUri parsed = BenchmarkUri::parse(uri);
  if (parsed.dataset != kGeneratorDataset) return std::nullopt;
  const auto seed = parse_seed_path(parsed.path);
  if (!seed) throw Error(ErrorCode::unknown_benchmark, uri);
  return seed;
}

class Session final : public rpc::CompilationSession {
 public:
  void init(const SpaceDescriptor&, std::shared_ptr<const LoadedBenchmark> benchmark) override {
    benchmark_ = std::static_pointer_cast<const LoadedProgram>(std::move(benchmark));
    program_ = benchmark_->program;
  }

  ActionOutcome apply_action(const Action& action) override {
    const auto index = static_cast<std::size_t>(std::get<std::int64_t>(action));
    program_ = run_pass(program_, kPassCatalog.at(index));
    return {};
  }

  ObservationValue set_observation(const SpaceDescriptor& space) override {
    if (space.id == kIr) return to_text(program_);
    if (space.id == kInstCount) return inst_count(program_);
    if (space.id == kOpcodeHistogram) {
      const auto h = opcode_histogram(program_);
      return std::vector<std::int64_t>(h.begin(), h.end());
    }
    if (space.id == kBaselineCost) return benchmark_->baseline;
    if (space.id == kDigest) return state_digest(program_);
    throw Error(ErrorCode::unknown_space, space.id);
  }

  std::unique_ptr<rpc::CompilationSession> fork() const override {
    return std::make_unique<Session>(*this);
  }

 private:
  std::shared_ptr<const LoadedProgram> benchmark_;
  Program program_;
};

class Backend final : public rpc::CompilationBackend {
 public:
  std::vector<SpaceDescriptor> action_spaces() const override {
    std::vector<std::string> names;
    for (Pass p : kPassCatalog) names.emplace_back(pass_name(p));
    return {SpaceDescriptor::discrete_space(kPassesSpace, std::move(names))};
  }

  std::vector<SpaceDescriptor> observation_spaces() const override {
    constexpr double kMax = static_cast<double>(std::numeric_limits<std::int64_t>::max());
    return {
        SpaceDescriptor::text(kIr),
        SpaceDescriptor::scalar(kInstCount, 0, kMax),
        SpaceDescriptor::vector(kOpcodeHistogram, static_cast<std::int64_t>(kHistogramBins)),
        SpaceDescriptor::scalar(kBaselineCost, 0, kMax),
        SpaceDescriptor::text(kDigest),
    };
  }

  std::string content_digest(const std::string& uri,
                             const std::optional<std::string>& content) const override {
    if (content) return sha256_hex(*content);
    if (const auto seed = generator_seed(uri)) {
      return sha256_hex("tinyir-generator\n" + std::to_string(*seed));
    }
    throw Error(ErrorCode::unknown_benchmark, uri + " (no program text supplied)");
  }

  std::shared_ptr<const LoadedBenchmark> load_benchmark(
      const std::string& uri, const std::optional<std::string>& content) override {
    auto loaded = std::make_shared<LoadedProgram>();
    loaded->uri = uri;
    loaded->content_digest = content_digest(uri, content);
    if (content) {
      loaded->program = parse(*content);
    } else {
      loaded->program = generate(*generator_seed(uri));
    }
    validate(loaded->program);
    loaded->baseline = baseline_cost(loaded->program);
    return loaded;
  }

  std::unique_ptr<rpc::CompilationSession> create_session() override {
    return std::make_unique<Session>();
  }
};

}  // namespace

std::unique_ptr<rpc::CompilationBackend> make_backend() { return std::make_unique<Backend>(); }

}  // namespace optgym::tinyir
