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

#include "optgym/gcc/backend.hpp"

#include <limits>

#include "optgym/common/codec.hpp"
#include "optgym/common/error.hpp"

namespace optgym::gcc {
namespace {

using rpc::ActionOutcome;
using rpc::LoadedBenchmark;

struct LoadedSource : LoadedBenchmark {
  std::string source;
};

struct Shared {
  GccSpec spec;
  std::vector<CategoricalAction> actions;
  std::shared_ptr<Measurer> measurer;
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

class Session final : public rpc::CompilationSession {
 public:
  explicit Session(std::shared_ptr<const Shared> shared) : shared_(std::move(shared)) {}

  void init(const SpaceDescriptor& action_space, std::shared_ptr<const LoadedBenchmark> benchmark) override {
    categorical_ = action_space.id == kCategoricalSpace;
    benchmark_ = std::static_pointer_cast<const LoadedSource>(std::move(benchmark));
    choices_.assign(shared_->spec.options.size(), 0);
  }

  ActionOutcome apply_action(const Action& action) override {
    if (categorical_) {
      apply(shared_->spec, shared_->actions.at(static_cast<std::size_t>(std::get<std::int64_t>(action))), choices_);
    } else {
      const auto& v = std::get<std::vector<std::int64_t>>(action);
      check_choices(shared_->spec, v);
      choices_ = v;
    }
    return {};
  }

  ObservationValue set_observation(const SpaceDescriptor& space) override {
    const std::string& id = space.id;
    if (id == kAsmSize) return size(render_flags(shared_->spec, choices_), SizeTarget::asm_size);
    if (id == kObjSize) return size(render_flags(shared_->spec, choices_), SizeTarget::obj_size);
    if (id == kAsmSizeOs) return size({"-Os"}, SizeTarget::asm_size);
    if (id == kObjSizeOs) return size({"-Os"}, SizeTarget::obj_size);
    if (id == kChoices) return choices_;
    if (id == kCommandLine) return join(render_flags(shared_->spec, choices_));
    if (id == kSource) return benchmark_->source;
    if (id == kDigest) {
      std::string text = benchmark_->content_digest;
      for (auto c : choices_) text += "\n" + std::to_string(c);
      return sha256_hex(text);
    }
    throw Error(ErrorCode::unknown_space, id);
  }

  std::unique_ptr<rpc::CompilationSession> fork() const override { return std::make_unique<Session>(*this); }

 private:
  std::int64_t size(const std::vector<std::string>& flags, SizeTarget target) const {
    return shared_->measurer->measure(flags, benchmark_->source, benchmark_->content_digest, target);
  }

  std::shared_ptr<const Shared> shared_;
  std::shared_ptr<const LoadedSource> benchmark_;
  bool categorical_ = true;
  std::vector<std::int64_t> choices_;
};

class Backend final : public rpc::CompilationBackend {
 public:
  explicit Backend(std::shared_ptr<const Shared> shared) : shared_(std::move(shared)) {}

  std::vector<SpaceDescriptor> action_spaces() const override {
    std::vector<std::string> names;
    names.reserve(shared_->actions.size());
    for (const auto& a : shared_->actions) names.push_back(a.name);
    std::vector<std::int64_t> lower(shared_->spec.options.size(), 0), upper;
    for (const auto& o : shared_->spec.options) upper.push_back(o.cardinality() - 1);
    return {SpaceDescriptor::discrete_space(kCategoricalSpace, std::move(names)),
            SpaceDescriptor::box(kChoicesSpace, std::move(lower), std::move(upper))};
  }

  std::vector<SpaceDescriptor> observation_spaces() const override {
    constexpr double kMax = static_cast<double>(std::numeric_limits<std::int64_t>::max());
    return {
        SpaceDescriptor::scalar(kAsmSize, 0, kMax, true, true),
        SpaceDescriptor::scalar(kObjSize, 0, kMax, true, true),
        SpaceDescriptor::scalar(kAsmSizeOs, 0, kMax, true, true),
        SpaceDescriptor::scalar(kObjSizeOs, 0, kMax, true, true),
        SpaceDescriptor::vector(kChoices, static_cast<std::int64_t>(shared_->spec.options.size())),
        SpaceDescriptor::text(kCommandLine),
        SpaceDescriptor::text(kSource),
        SpaceDescriptor::text(kDigest),
    };
  }

  std::shared_ptr<const LoadedBenchmark> load_benchmark(const std::string& uri,
                                                        const std::optional<std::string>& content) override {
    auto loaded = std::make_shared<LoadedSource>();
    loaded->uri = uri;
    loaded->content_digest = content_digest(uri, content);
    loaded->source = *content;
    shared_->measurer->measure({}, loaded->source, loaded->content_digest, SizeTarget::obj_size);
    return loaded;
  }

  std::unique_ptr<rpc::CompilationSession> create_session() override { return std::make_unique<Session>(shared_); }

 private:
  std::shared_ptr<const Shared> shared_;
};

}  // namespace

std::unique_ptr<rpc::CompilationBackend> make_backend(GccSpec spec, std::shared_ptr<Measurer> measurer) {
  auto shared = std::make_shared<Shared>();
  shared->actions = categorical_actions(spec);
  shared->spec = std::move(spec);
  shared->measurer = std::move(measurer);
  return std::make_unique<Backend>(std::move(shared));
}

}  // namespace optgym::gcc
