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

#include "optgym/env/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "optgym/common/error.hpp"
#include "optgym/rpc/wire.hpp"

namespace optgym {
namespace {

using rpc::RequestKind;

bool is_user_error(ErrorCode code) {
  return code == ErrorCode::out_of_range_action || code == ErrorCode::unknown_space ||
         code == ErrorCode::invalid_argument || code == ErrorCode::episode_done;
}

const RewardSpec* find_reward(const EnvSpec& spec, const std::string& id) {
  for (const auto& r : spec.rewards) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (!s.empty() && std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

class CompilerEnv final : public Environment {
 public:
  CompilerEnv(const EnvSpec& spec, MakeOptions options, std::shared_ptr<rpc::Service> service)
      : spec_(spec), options_(std::move(options)), service_(std::move(service)) {
    const std::string action_id = options_.action_space.value_or(spec_.default_action_space);
    const SpaceDescriptor* a = find_space(service_->action_spaces(), action_id);
    if (a == nullptr) throw Error(ErrorCode::unknown_space, "action space " + action_id);
    action_space_ = *a;
    observation_spaces_ = service_->observation_spaces();
    if (options_.observation_space && !find_space(observation_spaces_, *options_.observation_space)) {
      throw Error(ErrorCode::unknown_space, "observation space " + *options_.observation_space);
    }
    constexpr double kInf = std::numeric_limits<double>::max();
    for (const auto& r : spec_.rewards) {
      reward_spaces_.push_back(
          SpaceDescriptor::scalar(r.id, -kInf, kInf, r.deterministic, r.platform_dependent));
    }
    if (options_.reward_space && !find_reward(spec_, *options_.reward_space)) {
      throw Error(ErrorCode::unknown_space, "reward space " + *options_.reward_space);
    }
    benchmark_uri_ = options_.benchmark.value_or(spec_.default_benchmark);
  }

  ~CompilerEnv() override { end_session(); }

  const std::string& env_id() const override { return spec_.id; }
  const SpaceDescriptor& action_space() const override { return action_space_; }
  const std::vector<SpaceDescriptor>& observation_spaces() const override { return observation_spaces_; }
  const std::vector<SpaceDescriptor>& reward_spaces() const override { return reward_spaces_; }
  std::optional<std::string> observation_space() const override { return options_.observation_space; }
  std::optional<std::string> reward_space() const override { return options_.reward_space; }

  std::optional<ObservationValue> reset(const std::optional<std::string>& benchmark) override {
    if (benchmark) benchmark_uri_ = *benchmark;
    const Benchmark b = resolve(benchmark_uri_);
    end_session();

    std::vector<std::string> observe;
    push_unique(observe, spec_.digest_space);
    if (options_.observation_space) push_unique(observe, *options_.observation_space);
    for (const auto& r : spec_.rewards) {
      const bool is_default = options_.reward_space && *options_.reward_space == r.id;
      if (is_default || r.scale == RewardScale::baseline_gain) {
        push_unique(observe, r.metric);
        push_unique(observe, r.baseline);
      }
    }

    json request = rpc::make_request(RequestKind::start_session);
    request["benchmark"] = benchmark_uri_;
    request["action_space"] = action_space_.id;
    if (b.content) request["content"] = *b.content;
    request["observation_spaces"] = observe;
    json reply;
    try {
      reply = service_->call(request);
    } catch (const Error& e) {
      // A crash noticed only now costs one restart, then one more attempt.
      if (e.code() != ErrorCode::backend_crash && e.code() != ErrorCode::timeout) throw;
      reply = service_->call(request);
    }
    session_ = reply.at("session_id").get<std::uint64_t>();
    generation_ = service_->generation();

    std::map<std::string, ObservationValue> values;
    const auto& obs = reply.at("observations");
    for (std::size_t i = 0; i < observe.size(); ++i) values[observe[i]] = observation_from_json(obs.at(i));

    ++episode_;
    done_ = false;
    history_.clear();
    cumulative_ = 0;
    digest_ = std::get<std::string>(values.at(spec_.digest_space));
    metrics_.clear();
    initial_.clear();
    baselines_.clear();
    absorb_metrics(values);
    for (const auto& r : spec_.rewards) {
      if (r.scale == RewardScale::baseline_gain && metrics_.count(r.metric)) {
        initial_[r.metric] = metrics_.at(r.metric);
      }
    }
    if (options_.observation_space) return values.at(*options_.observation_space);
    return std::nullopt;
  }

  StepReply step(const std::vector<Action>& actions,
                 const std::optional<std::vector<std::string>>& observation_spaces,
                 const std::optional<std::vector<std::string>>& reward_spaces) override {
    if (!session_ && episode_ == 0) throw Error(ErrorCode::invalid_argument, "reset() before step()");
    if (done_) throw Error(ErrorCode::episode_done, "episode is over; reset() to continue");
    for (const auto& a : actions) check_action(action_space_, a);

    std::vector<std::string> obs_ids = observation_spaces.value_or(
        options_.observation_space ? std::vector<std::string>{*options_.observation_space}
                                   : std::vector<std::string>{});
    std::vector<std::string> reward_ids = reward_spaces.value_or(
        options_.reward_space ? std::vector<std::string>{*options_.reward_space}
                              : std::vector<std::string>{});
    for (const auto& id : obs_ids) {
      if (!find_space(observation_spaces_, id)) throw Error(ErrorCode::unknown_space, "observation space " + id);
    }
    std::vector<const RewardSpec*> rewards;  // requested, then the default
    for (const auto& id : reward_ids) {
      const RewardSpec* r = find_reward(spec_, id);
      if (r == nullptr) throw Error(ErrorCode::unknown_space, "reward space " + id);
      rewards.push_back(r);
    }
    const RewardSpec* accrue = options_.reward_space ? find_reward(spec_, *options_.reward_space) : nullptr;

    StepReply out;
    if (!session_ || service_->generation() != generation_) {
      return fail(out, Error(ErrorCode::backend_crash, "service restarted; the session was lost"));
    }

    // Previous metric values must describe the current state.
    std::vector<std::string> needed;
    auto want = [&](const RewardSpec* r) {
      push_unique(needed, r->metric);
      if (r->scale != RewardScale::none && !baselines_.count(r->baseline)) push_unique(needed, r->baseline);
    };
    for (const auto* r : rewards) want(r);
    if (accrue) want(accrue);
    std::vector<std::string> stale;
    for (const auto& m : needed) {
      if (!metrics_.count(m) && !baselines_.count(m)) stale.push_back(m);
    }
    try {
      if (!stale.empty()) absorb_metrics(call_step({}, stale).second);
    } catch (const Error& e) {
      if (is_user_error(e.code())) throw;
      return fail(out, e);
    }

    std::vector<std::string> request = obs_ids;
    push_unique(request, spec_.digest_space);
    for (const auto& m : needed) push_unique(request, m);

    rpc::StepResult result;
    std::map<std::string, ObservationValue> values;
    try {
      std::tie(result, values) = call_step(actions, request);
    } catch (const Error& e) {
      if (is_user_error(e.code())) throw;
      return fail(out, e);
    }

    for (const auto& a : actions) history_.push_back(action_name(action_space_, a));
    if (result.action_space_changed && result.action_space) {
      action_space_ = *result.action_space;
      out.action_space_changed = true;
    }
    digest_ = std::get<std::string>(values.at(spec_.digest_space));
    const auto previous = metrics_;
    auto reward_of = [&](const RewardSpec* r) {
      const double cur = observation_scalar(values.at(r->metric));
      const double gain = previous.at(r->metric) - cur;
      double denom = 0;
      if (r->scale == RewardScale::baseline_gain) {
        denom = initial_.count(r->metric) ? initial_.at(r->metric) - baselines_.at(r->baseline) : 0;
      } else if (r->scale == RewardScale::baseline_value) {
        denom = baselines_.at(r->baseline);
      }
      return denom == 0 ? gain : gain / denom;
    };
    metrics_.clear();
    absorb_metrics(values, /*baselines_only=*/true);
    for (const auto* r : rewards) out.rewards.push_back(reward_of(r));
    if (accrue) cumulative_ += reward_of(accrue);
    absorb_metrics(values);

    for (const auto& id : obs_ids) out.observations.push_back(values.at(id));
    done_ = result.end_of_episode;
    out.done = done_;
    return out;
  }

  std::unique_ptr<Environment> fork() override {
    if (!session_) throw Error(ErrorCode::invalid_argument, "reset() before fork()");
    if (service_->generation() != generation_) {
      throw Error(ErrorCode::backend_crash, "service restarted; the session was lost");
    }
    json request = rpc::make_request(RequestKind::fork);
    request["session_id"] = *session_;
    json reply;
    try {
      reply = service_->call(request);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::session_cap_exceeded) throw Error(ErrorCode::resource_exhausted, e.detail());
      throw;
    }
    auto child = std::unique_ptr<CompilerEnv>(new CompilerEnv(*this));
    child->session_ = reply.at("session_id").get<std::uint64_t>();
    return child;
  }

  EnvState state() const override {
    return {spec_.id, benchmark_uri_, options_.reward_space.value_or(""), history_, cumulative_, digest_};
  }
  std::string benchmark() const override { return benchmark_uri_; }
  double cumulative_reward() const override { return cumulative_; }
  const std::string& state_digest() const override { return digest_; }
  const std::vector<std::string>& actions() const override { return history_; }
  std::int64_t episode() const override { return episode_; }
  bool done() const override { return done_; }
  rpc::Service& service() override { return *service_; }

 private:
  CompilerEnv(const CompilerEnv&) = default;

  Benchmark resolve(const std::string& uri) const {
    const BenchmarkUri parsed = BenchmarkUri::parse(uri);
    const auto dataset = [&] {
      try {
        return datasets().dataset(parsed.dataset);
      } catch (const Error&) {
        throw Error(ErrorCode::unknown_benchmark, uri);
      }
    }();
    std::string family = dataset->backend();
    if (family.empty()) family = backend_for_extension(std::filesystem::path(parsed.path).extension().string());
    if (family != spec_.backend) {
      throw Error(ErrorCode::unknown_benchmark, uri + " is not a " + spec_.backend + " benchmark");
    }
    return dataset->load(parsed);
  }

  std::pair<rpc::StepResult, std::map<std::string, ObservationValue>> call_step(
      const std::vector<Action>& actions, const std::vector<std::string>& spaces) {
    rpc::StepResult r = rpc::parse_step_reply(service_->call(rpc::step_request(*session_, actions, spaces)));
    std::map<std::string, ObservationValue> values;
    for (std::size_t i = 0; i < spaces.size(); ++i) values[spaces[i]] = r.observations.at(i);
    return {std::move(r), std::move(values)};
  }

  // Records scalar metric and baseline observations from `values`.
  void absorb_metrics(const std::map<std::string, ObservationValue>& values, bool baselines_only = false) {
    for (const auto& r : spec_.rewards) {
      if (!baselines_only) {
        if (const auto it = values.find(r.metric); it != values.end()) {
          metrics_[r.metric] = observation_scalar(it->second);
        }
      }
      if (!r.baseline.empty()) {
        if (const auto it = values.find(r.baseline); it != values.end()) {
          baselines_[r.baseline] = observation_scalar(it->second);
        }
      }
    }
  }

  StepReply& fail(StepReply& out, const Error& e) {
    done_ = true;
    if (e.code() == ErrorCode::backend_crash || e.code() == ErrorCode::timeout ||
        e.code() == ErrorCode::backend_unavailable || e.code() == ErrorCode::session_not_found ||
        e.code() == ErrorCode::session_expired) {
      session_.reset();  // nothing left to end
    }
    out.done = true;
    out.info["error"] = std::string(to_string(e.code()));
    out.info["detail"] = e.detail();
    return out;
  }

  void end_session() {
    if (!session_) return;
    const auto sid = *session_;
    session_.reset();
    if (service_->generation() != generation_) return;
    json request = rpc::make_request(RequestKind::end_session);
    request["session_id"] = sid;
    try {
      service_->call(request, /*allow_restart=*/false);
    } catch (const Error&) {
    }
  }

  const EnvSpec& spec_;
  MakeOptions options_;
  std::shared_ptr<rpc::Service> service_;
  SpaceDescriptor action_space_;
  std::vector<SpaceDescriptor> observation_spaces_;
  std::vector<SpaceDescriptor> reward_spaces_;

  std::string benchmark_uri_;
  std::optional<std::uint64_t> session_;
  std::uint64_t generation_ = 0;
  std::int64_t episode_ = 0;
  bool done_ = false;
  std::vector<std::string> history_;
  double cumulative_ = 0;
  std::string digest_;
  std::map<std::string, double> metrics_;    // metric values of the current state
  std::map<std::string, double> initial_;    // metric values right after reset
  std::map<std::string, double> baselines_;  // per-benchmark reference values
};

}  // namespace

std::unique_ptr<Environment> make(const std::string& env_id, const MakeOptions& options) {
  const EnvSpec& spec = env_spec(env_id);
  rpc::ServiceSpec service;
  service.backend = spec.backend;
  service.config = options.service;
  service.endpoint = options.endpoint;
  if (options.compiler) service.args.push_back("--compiler=" + *options.compiler);
  std::shared_ptr<rpc::Service> svc;
  try {
    svc = rpc::start_service(service);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_argument) throw;
    throw Error(ErrorCode::backend_unavailable, e.what());
  }
  return std::make_unique<CompilerEnv>(spec, options, std::move(svc));
}

std::unique_ptr<Environment> restore_state(const EnvState& state, MakeOptions options) {
  options.benchmark = state.benchmark;
  options.reward_space =
      state.reward_space_id.empty() ? std::nullopt : std::optional<std::string>(state.reward_space_id);
  auto env = make(state.env_id, options);
  env->reset();
  std::vector<Action> actions;
  for (const auto& name : state.actions) {
    try {
      actions.push_back(action_from_name(env->action_space(), name));
    } catch (const Error&) {
      throw Error(ErrorCode::digest_mismatch, "action '" + name + "' is not in the action space");
    }
  }
  if (!actions.empty()) {
    const StepReply r = env->step(actions, std::vector<std::string>{}, std::vector<std::string>{});
    if (r.info.count("error")) {
      throw Error(error_code_from_string(r.info.at("error")), "replay failed: " + r.info.at("detail"));
    }
  }
  if (env->state_digest() != state.state_digest) {
    throw Error(ErrorCode::digest_mismatch,
                "replay reached " + env->state_digest() + ", state recorded " + state.state_digest);
  }
  return env;
}

}  // namespace optgym
