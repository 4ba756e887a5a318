// Single-episode rollout under a fixed policy, with optional per-step recording.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "hyperfc/core/json_io.hpp"
#include "hyperfc/env/environment.hpp"
#include "hyperfc/nets/policy.hpp"

namespace hyperfc {

struct StepRecord {
    int k = 0;
    AircraftState state;
    ReferencePoint reference;
    Observation obs;  // observation the action was computed from
    CommandVector action = CommandVector::Zero();
    CommandVector command = CommandVector::Zero();
    RewardBreakdown reward;
    FailureVector lambda;
    double position_error = 0.0;
    Termination cause = Termination::None;
};

struct EpisodeLog {
    std::uint64_t seed = 0;
    ScenarioSpec scenario;
    int delay = 0;
    double dt = 0.04;
    std::vector<double> position_errors;
    std::vector<StepRecord> steps;  // only when recording
    Termination cause = Termination::None;
    double total_reward = 0.0;
    int length = 0;
};

struct PathErrorMetrics {
    double mpe = 0.0;
    double maxpe = 0.0;
};

/// Mean and maximum of the per-step Euclidean position errors.
inline PathErrorMetrics episode_metrics(const std::vector<double>& errors) {
    if (errors.empty()) throw ProtocolError("episode log has no steps");
    PathErrorMetrics m;
    double sum = 0.0;
    for (double e : errors) {
        sum += e;
        m.maxpe = std::max(m.maxpe, e);
    }
    m.mpe = sum / static_cast<double>(errors.size());
    return m;
}

inline PathErrorMetrics episode_metrics(const EpisodeLog& log) { return episode_metrics(log.position_errors); }

struct RolloutOptions {
    bool deterministic = true;
    bool record = false;
    std::uint64_t action_seed = 0;  // used only for stochastic actions
};

inline EpisodeLog run_episode(Environment& env, const Policy& policy, std::uint64_t seed,
                              const std::optional<ScenarioSpec>& scenario = std::nullopt,
                              const RolloutOptions& opt = {}) {
    EpisodeLog log;
    log.seed = seed;
    log.dt = env.config().dt;
    Observation obs = env.reset(seed, scenario);
    log.scenario = env.scenario();
    log.delay = env.delay_steps();
    Rng action_rng(opt.action_seed);
    const Eigen::VectorXd log_std = policy.log_std();
    while (!env.done()) {
        const auto out = policy.evaluate(obs.state, obs.lambda);
        const SampledAction a = sample_action(out.mean, log_std, action_rng, opt.deterministic);
        const StepResult r = env.step(a.action);
        log.position_errors.push_back(r.position_error);
        log.total_reward += r.reward.total;
        ++log.length;
        if (opt.record) {
            StepRecord rec;
            rec.k = log.length - 1;
            rec.state = env.state();
            rec.reference = env.reference();
            rec.obs = obs;
            rec.action = a.action;
            rec.command = r.command;
            rec.reward = r.reward;
            rec.lambda = r.lambda;
            rec.position_error = r.position_error;
            rec.cause = r.cause;
            log.steps.push_back(std::move(rec));
        }
        obs = r.obs;
    }
    log.cause = env.cause();
    return log;
}

inline Json step_record_to_json(const StepRecord& r) {
    return {{"k", r.k},
            {"state", state_to_json(r.state)},
            {"reference",
             {{"p", to_json_array(r.reference.position)},
              {"euler", to_json_array(r.reference.euler)},
              {"course", r.reference.course},
              {"command", to_json_array(r.reference.command)},
              {"kappa", r.reference.kappa},
              {"gamma", r.reference.gamma}}},
            {"obs", to_json_array(r.obs.state)},
            {"action", to_json_array(r.action)},
            {"command", to_json_array(r.command)},
            {"reward",
             {{"tracking", r.reward.tracking},
              {"barrier", r.reward.barrier},
              {"rate", r.reward.rate},
              {"total", r.reward.total}}},
            {"lambda", to_json_array(r.lambda.as_vector())},
            {"position_error", r.position_error},
            {"cause", to_string(r.cause)}};
}

/// JSON-lines: a header line with episode metadata, then one line per step.
inline void write_episode_jsonl(std::ostream& os, const EpisodeLog& log) {
    const Json header = {{"schema", "hyperfc-episode/1"},
                         {"seed", log.seed},
                         {"scenario", scenario_to_json(log.scenario)},
                         {"delay", log.delay},
                         {"dt", log.dt},
                         {"length", log.length},
                         {"total_reward", log.total_reward},
                         {"cause", to_string(log.cause)}};
    os << header.dump() << '\n';
    for (const auto& r : log.steps) os << step_record_to_json(r).dump() << '\n';
}

}  // namespace hyperfc
