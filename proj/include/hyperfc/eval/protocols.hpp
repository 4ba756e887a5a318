// Static-failure and flutter evaluation protocols with per-actuator aggregation.
#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "hyperfc/eval/episode.hpp"

namespace hyperfc {

enum class EvalProtocol { Static, Flutter };

inline std::string to_string(EvalProtocol p) { return p == EvalProtocol::Static ? "static" : "flutter"; }

inline EvalProtocol eval_protocol_from_string(const std::string& s) {
    if (s == "static") return EvalProtocol::Static;
    if (s == "flutter") return EvalProtocol::Flutter;
    throw ConfigError("unknown protocol '" + s + "' (expected static or flutter)");
}

struct EvalConfig {
    int episodes = 1000;
    std::uint64_t seed = 0;
    bool stochastic = false;
    int workers = 1;
    FlutterConfig flutter;
};

struct EpisodeResult {
    int index = 0;
    std::uint64_t seed = 0;
    ScenarioSpec scenario;
    double mpe = 0.0;
    double maxpe = 0.0;
    int length = 0;
    Termination cause = Termination::None;
    double total_reward = 0.0;
};

struct ActuatorRow {
    std::string actuator;  // actuator name or "all"
    int episodes = 0;
    double mpe_mean = 0.0;
    double maxpe_mean = 0.0;
    double worst_case = 0.0;
    double maxpe_sd = 0.0;
};

struct CurvePoint {
    std::string actuator;
    double level = 0.0;  // stuck level (static) or flutter center
    int episodes = 0;
    double maxpe_mean = 0.0;
};

struct EvalReport {
    std::string policy;
    EvalProtocol protocol = EvalProtocol::Static;
    bool stochastic = false;
    std::vector<EpisodeResult> episodes;
    std::vector<ActuatorRow> rows;
    std::vector<CurvePoint> curve;
};

inline ActuatorRow aggregate_rows(const std::string& name, const std::vector<const EpisodeResult*>& eps) {
    ActuatorRow r;
    r.actuator = name;
    r.episodes = static_cast<int>(eps.size());
    if (eps.empty()) return r;
    for (const auto* e : eps) {
        r.mpe_mean += e->mpe;
        r.maxpe_mean += e->maxpe;
        r.worst_case = std::max(r.worst_case, e->maxpe);
    }
    r.mpe_mean /= r.episodes;
    r.maxpe_mean /= r.episodes;
    if (r.episodes > 1) {
        double ss = 0.0;
        for (const auto* e : eps) ss += (e->maxpe - r.maxpe_mean) * (e->maxpe - r.maxpe_mean);
        r.maxpe_sd = std::sqrt(ss / (r.episodes - 1));
    }
    return r;
}

/// Per-actuator rows, an "all" row, and mean MaxPE per (actuator, level).
inline void aggregate(EvalReport& rep) {
    rep.rows.clear();
    rep.curve.clear();
    std::vector<const EpisodeResult*> all;
    for (const auto& e : rep.episodes) all.push_back(&e);
    for (int a = 0; a < kNumFailActuators; ++a) {
        const auto act = static_cast<FailActuator>(a);
        std::vector<const EpisodeResult*> sel;
        std::map<double, std::vector<const EpisodeResult*>> by_level;
        for (const auto* e : all)
            if (e->scenario.actuator == act) {
                sel.push_back(e);
                by_level[e->scenario.level].push_back(e);
            }
        rep.rows.push_back(aggregate_rows(std::string(actuator_name(act)), sel));
        for (const auto& [level, eps] : by_level) {
            const ActuatorRow r = aggregate_rows("", eps);
            rep.curve.push_back({std::string(actuator_name(act)), level, r.episodes, r.maxpe_mean});
        }
    }
    rep.rows.push_back(aggregate_rows("all", all));
}

/// Scenario for episode i of a protocol; depends only on (seed, i).
inline ScenarioSpec eval_scenario(EvalProtocol p, std::uint64_t seed, int i, int horizon, double dt,
                                  const FlutterConfig& fc) {
    Rng rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(i)));
    return p == EvalProtocol::Static ? sample_static_eval_scenario(rng, horizon)
                                     : sample_flutter_scenario(rng, horizon, dt, fc);
}

/// Evaluation runs without the early-termination distance so errors are
/// measured over the whole episode.
inline EnvConfig eval_env_config(EnvConfig c) {
    c.termination_distance = 0.0;
    return c;
}

inline EvalReport run_evaluation(const Policy& policy, const AirframeParams& ap, const EnvConfig& train_env,
                                 EvalProtocol protocol, const EvalConfig& cfg,
                                 std::shared_ptr<const TrimTable> trims = nullptr) {
    if (cfg.episodes <= 0) throw ConfigError("evaluation needs at least one episode");
    if (cfg.workers <= 0) throw ConfigError("workers must be positive");
    const EnvConfig ec = eval_env_config(train_env);
    if (!trims) trims = std::make_shared<const TrimTable>(ap, ec.airspeed);
    EvalReport rep;
    rep.policy = policy.spec().tag();
    rep.protocol = protocol;
    rep.stochastic = cfg.stochastic;
    rep.episodes.resize(static_cast<std::size_t>(cfg.episodes));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.workers));
    auto work = [&](int w) {
        try {
            Environment env(ap, ec, trims);
            for (int i = w; i < cfg.episodes; i += cfg.workers) {
                const ScenarioSpec sc = eval_scenario(protocol, cfg.seed, i, ec.horizon, ec.dt, cfg.flutter);
                const std::uint64_t env_seed = mix_seed(cfg.seed, 2 * static_cast<std::uint64_t>(i) + 1);
                RolloutOptions ro;
                ro.deterministic = !cfg.stochastic;
                ro.action_seed = mix_seed(env_seed, 7);
                const EpisodeLog log = run_episode(env, policy, env_seed, sc, ro);
                const PathErrorMetrics m = episode_metrics(log);
                rep.episodes[static_cast<std::size_t>(i)] = {i,     env_seed, sc,         m.mpe,
                                                             m.maxpe, log.length, log.cause, log.total_reward};
            }
        } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
    };
    if (cfg.workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    aggregate(rep);
    return rep;
}

inline EvalReport eval_static(const Policy& policy, const AirframeParams& ap, const EnvConfig& env,
                              const EvalConfig& cfg, std::shared_ptr<const TrimTable> trims = nullptr) {
    return run_evaluation(policy, ap, env, EvalProtocol::Static, cfg, std::move(trims));
}

inline EvalReport eval_flutter(const Policy& policy, const AirframeParams& ap, const EnvConfig& env,
                               const EvalConfig& cfg, std::shared_ptr<const TrimTable> trims = nullptr) {
    return run_evaluation(policy, ap, env, EvalProtocol::Flutter, cfg, std::move(trims));
}

}  // namespace hyperfc
