// Failure scenarios: training mixture, static evaluation grid, and flutter.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hyperfc/core/failure.hpp"
#include "hyperfc/core/json_io.hpp"
#include "hyperfc/core/rng.hpp"

namespace hyperfc {

inline constexpr std::array<double, 5> kTrainLevels = {0.0, -0.25, 0.25, -0.5, 0.5};
inline constexpr std::array<double, 9> kEvalLevels = {0.0, -0.125, 0.125, -0.25, 0.25, -0.375, 0.375, -0.5, 0.5};

enum class ScenarioKind { Nominal, StuckFullEpisode, StuckAtOnset, Flutter };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Nominal: return "nominal";
        case ScenarioKind::StuckFullEpisode: return "stuck_full_episode";
        case ScenarioKind::StuckAtOnset: return "stuck_at_onset";
        case ScenarioKind::Flutter: return "flutter";
    }
    return "?";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "nominal") return ScenarioKind::Nominal;
    if (s == "stuck_full_episode") return ScenarioKind::StuckFullEpisode;
    if (s == "stuck_at_onset") return ScenarioKind::StuckAtOnset;
    if (s == "flutter") return ScenarioKind::Flutter;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

/// A stuck level held from `start` until the next hold begins.
struct FlutterHold {
    int start = 0;
    double level = 0.0;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Nominal;
    FailActuator actuator = FailActuator::RightAileron;
    double level = 0.0;  // stuck level (center level for flutter)
    int onset = 0;       // N_fail, control steps
    int duration = 0;    // flutter window length, steps
    std::vector<FlutterHold> holds;
};

/// Piecewise-constant stuck level inside [onset, onset + duration); nominal outside.
inline FailureVector flutter_signal(const ScenarioSpec& spec, int k) {
    if (spec.kind != ScenarioKind::Flutter) throw ProtocolError("flutter_signal on a non-flutter scenario");
    if (k < spec.onset || k >= spec.onset + spec.duration || spec.holds.empty()) return FailureVector::nominal();
    auto it = std::upper_bound(spec.holds.begin(), spec.holds.end(), k,
                               [](int step, const FlutterHold& h) { return step < h.start; });
    if (it == spec.holds.begin()) return FailureVector::nominal();
    return FailureVector::stuck(spec.actuator, std::prev(it)->level);
}

/// Failure vector in effect at control step k.
inline FailureVector failure_at(const ScenarioSpec& spec, int k) {
    switch (spec.kind) {
        case ScenarioKind::Nominal: return FailureVector::nominal();
        case ScenarioKind::StuckFullEpisode: return FailureVector::stuck(spec.actuator, spec.level);
        case ScenarioKind::StuckAtOnset:
            return k >= spec.onset ? FailureVector::stuck(spec.actuator, spec.level) : FailureVector::nominal();
        case ScenarioKind::Flutter: return flutter_signal(spec, k);
    }
    return FailureVector::nominal();
}

struct ScenarioMixture {
    double nominal = 1.0 / 3.0;
    double stuck_full_episode = 1.0 / 3.0;
    double stuck_at_onset = 1.0 / 3.0;
};

/// Onset drawn uniformly from the middle 80% of the episode.
inline int sample_onset(Rng& rng, int horizon, int reserve = 0) {
    const int lo = std::max(1, horizon / 10);
    const int hi = std::max(lo, std::min(horizon - horizon / 10, horizon - reserve - 1));
    return rng.uniform_int(lo, hi);
}

inline FailActuator sample_actuator(Rng& rng) {
    return static_cast<FailActuator>(rng.uniform_int(0, kNumFailActuators - 1));
}

inline ScenarioSpec sample_training_scenario(Rng& rng, int horizon, const ScenarioMixture& mix = {}) {
    const double total = mix.nominal + mix.stuck_full_episode + mix.stuck_at_onset;
    if (!(total > 0.0)) throw ConfigError("scenario mixture weights must sum to a positive value");
    const double u = rng.uniform(0.0, total);
    ScenarioSpec s;
    if (u < mix.nominal) s.kind = ScenarioKind::Nominal;
    else if (u < mix.nominal + mix.stuck_full_episode) s.kind = ScenarioKind::StuckFullEpisode;
    else s.kind = ScenarioKind::StuckAtOnset;
    s.actuator = sample_actuator(rng);
    s.level = kTrainLevels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kTrainLevels.size()) - 1))];
    s.onset = sample_onset(rng, horizon);
    if (s.kind == ScenarioKind::Nominal) s.level = 0.0;
    if (s.kind != ScenarioKind::StuckAtOnset) s.onset = 0;
    return s;
}

/// Static evaluation: stuck at a random onset with a level from the extended grid.
inline ScenarioSpec sample_static_eval_scenario(Rng& rng, int horizon) {
    ScenarioSpec s;
    s.kind = ScenarioKind::StuckAtOnset;
    s.actuator = sample_actuator(rng);
    s.level = kEvalLevels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kEvalLevels.size()) - 1))];
    s.onset = sample_onset(rng, horizon);
    return s;
}

struct FlutterConfig {
    double min_duration = 1.0;  // s
    double max_duration = 10.0;
    double min_hold = 0.2;      // s
    double max_hold = 1.0;
    double excursion = 0.2;     // half-width around the center level
};

/// Flutter episode: window length drawn in [min, max] duration, filled with
/// whole holds so every hold respects the hold-time bounds. Levels are uniform
/// in [center - excursion, center + excursion] clipped to [-1, 1].
inline ScenarioSpec sample_flutter_scenario(Rng& rng, int horizon, double dt, const FlutterConfig& cfg = {}) {
    ScenarioSpec s;
    s.kind = ScenarioKind::Flutter;
    s.actuator = sample_actuator(rng);
    s.level = kEvalLevels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kEvalLevels.size()) - 1))];
    const int min_steps = static_cast<int>(std::lround(cfg.min_duration / dt));
    const int max_steps = static_cast<int>(std::lround(cfg.max_duration / dt));
    const int min_hold = static_cast<int>(std::lround(cfg.min_hold / dt));
    const int max_hold = static_cast<int>(std::lround(cfg.max_hold / dt));
    const int target = rng.uniform_int(min_steps, max_steps);
    const double lo = std::max(-1.0, s.level - cfg.excursion);
    const double hi = std::min(1.0, s.level + cfg.excursion);

    std::vector<int> lengths;
    std::vector<double> levels;
    int total = 0;
    while (total < target) {
        lengths.push_back(rng.uniform_int(min_hold, max_hold));
        levels.push_back(rng.uniform(lo, hi));
        total += lengths.back();
    }
    if (total > max_steps) {
        total -= lengths.back();
        lengths.pop_back();
        levels.pop_back();
    }
    s.duration = total;
    s.onset = sample_onset(rng, horizon, total);
    int start = s.onset;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        s.holds.push_back({start, levels[i]});
        start += lengths[i];
    }
    return s;
}

inline Json scenario_to_json(const ScenarioSpec& s) {
    Json holds = Json::array();
    for (const auto& h : s.holds) holds.push_back({h.start, h.level});
    return {{"kind", to_string(s.kind)},
            {"actuator", std::string(actuator_name(s.actuator))},
            {"level", s.level},
            {"onset", s.onset},
            {"duration", s.duration},
            {"holds", holds}};
}

inline ScenarioSpec scenario_from_json(const Json& j) {
    ScenarioSpec s;
    s.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
    s.actuator = actuator_from_name(j.at("actuator").get<std::string>());
    s.level = j.at("level").get<double>();
    s.onset = j.at("onset").get<int>();
    s.duration = j.at("duration").get<int>();
    for (const auto& h : j.at("holds")) s.holds.push_back({h.at(0).get<int>(), h.at(1).get<double>()});
    return s;
}

}  // namespace hyperfc
