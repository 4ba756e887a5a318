// Run configuration: JSON file with airframe, arch, seed, out, ppo, scenario
// and eval sections. Unknown keys are rejected at every level.
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyperfc/core/json_io.hpp"
#include "hyperfc/dynamics/airframe.hpp"
#include "hyperfc/env/environment.hpp"
#include "hyperfc/eval/protocols.hpp"
#include "hyperfc/nets/arch.hpp"
#include "hyperfc/ppo/checkpoint.hpp"
#include "hyperfc/ppo/update.hpp"

namespace hyperfc {

inline constexpr const char* kConfigSchema = "hyperfc-config/1";

struct RunConfig {
    std::string airframe;  // empty = built-in defaults
    std::string arch = "FiLM";
    std::uint64_t seed = 0;
    std::string out = "runs/default";
    PPOConfig ppo;
    EnvConfig env;
    EvalConfig eval;

    ArchSpec arch_spec() const { return ArchSpec::parse(arch); }

    AirframeParams airframe_params() const {
        if (airframe.empty()) return AirframeParams{};
        return load_airframe(airframe);
    }

    void validate() const {
        arch_spec().validate();
        ppo.validate();
        if (!(env.dt > 0.0)) throw ConfigError("scenario.dt must be positive");
        if (env.horizon <= 0) throw ConfigError("scenario.horizon must be positive");
        if (!(env.airspeed > 0.0)) throw ConfigError("scenario.airspeed must be positive");
        if (env.path.min_segment <= 0.0 || env.path.max_segment < env.path.min_segment)
            throw ConfigError("scenario segment durations must satisfy 0 < min <= max");
        if (env.initial_offset.position < 0.0 || env.initial_offset.attitude < 0.0)
            throw ConfigError("initial offsets must be non-negative");
        if (env.mixture.nominal < 0.0 || env.mixture.stuck_full_episode < 0.0 || env.mixture.stuck_at_onset < 0.0)
            throw ConfigError("scenario mixture weights must be non-negative");
        if (eval.episodes <= 0) throw ConfigError("eval.episodes must be positive");
        if (eval.workers <= 0) throw ConfigError("eval.workers must be positive");
        if (out.empty()) throw ConfigError("out must not be empty");
    }
};

namespace detail {

template <typename E>
using EnumTable = std::vector<std::pair<const char*, E>>;

inline const EnumTable<RewardMode>& reward_modes() {
    static const EnumTable<RewardMode> t{{"dense", RewardMode::Dense}, {"banded", RewardMode::Banded}};
    return t;
}

inline const EnumTable<PathMode>& path_modes() {
    static const EnumTable<PathMode> t{{"random", PathMode::Random}, {"straight_level", PathMode::StraightLevel}};
    return t;
}

/// Reads fields from an object, remembering which keys were consumed.
class ConfigReader {
public:
    ConfigReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    void operator()(const char* key, double& v) {
        if (const Json* x = take(key)) {
            if (!x->is_number()) bad(key, "a number");
            v = x->get<double>();
        }
    }
    void operator()(const char* key, int& v) {
        if (const Json* x = take(key)) {
            if (!x->is_number_integer()) bad(key, "an integer");
            v = x->get<int>();
        }
    }
    void operator()(const char* key, std::uint64_t& v) {
        if (const Json* x = take(key)) {
            if (!x->is_number_unsigned() && !(x->is_number_integer() && x->get<long long>() >= 0))
                bad(key, "a non-negative integer");
            v = x->get<std::uint64_t>();
        }
    }
    void operator()(const char* key, bool& v) {
        if (const Json* x = take(key)) {
            if (!x->is_boolean()) bad(key, "true or false");
            v = x->get<bool>();
        }
    }
    void operator()(const char* key, std::string& v) {
        if (const Json* x = take(key)) {
            if (!x->is_string()) bad(key, "a string");
            v = x->get<std::string>();
        }
    }
    template <typename E>
    void enumeration(const char* key, E& v, const EnumTable<E>& table) {
        if (const Json* x = take(key)) {
            if (!x->is_string()) bad(key, "a string");
            const auto s = x->get<std::string>();
            for (const auto& [name, value] : table)
                if (s == name) {
                    v = value;
                    return;
                }
            throw ConfigError(where_ + "." + key + ": unknown value '" + s + "'");
        }
    }
    void section(const char* key, const std::function<void(ConfigReader&)>& body) {
        if (const Json* x = take(key)) {
            ConfigReader sub(*x, where_ + "." + key);
            body(sub);
            sub.finish();
        }
    }
    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }

private:
    const Json* take(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[noreturn]] void bad(const char* key, const char* what) const {
        throw ConfigError(where_ + "." + key + ": expected " + what);
    }

    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

/// Emits every field, producing the fully resolved configuration.
class ConfigWriter {
public:
    Json j = Json::object();

    template <typename T>
    void operator()(const char* key, const T& v) { j[key] = v; }

    template <typename E>
    void enumeration(const char* key, const E& v, const EnumTable<E>& table) {
        for (const auto& [name, value] : table)
            if (value == v) j[key] = name;
    }
    void section(const char* key, const std::function<void(ConfigWriter&)>& body) {
        ConfigWriter sub;
        body(sub);
        j[key] = sub.j;
    }
};

template <typename V>
void visit_ppo(V& v, PPOConfig& c) {
    v("lr", c.lr);
    v("clip", c.clip);
    v("gamma", c.gamma);
    v("gae_lambda", c.gae_lambda);
    v("epochs", c.epochs);
    v("minibatch", c.minibatch);
    v("entropy_coef", c.entropy_coef);
    v("value_coef", c.value_coef);
    v("max_grad_norm", c.max_grad_norm);
    v("n_env", c.n_env);
    v("n_steps", c.n_steps);
    v("iterations", c.iterations);
    v("workers", c.workers);
    v("checkpoint_interval", c.checkpoint_interval);
    v("eval_interval", c.eval_interval);
    v("eval_episodes", c.eval_episodes);
}

template <typename V>
void visit_env(V& v, EnvConfig& c) {
    v("dt", c.dt);
    v("horizon", c.horizon);
    v("airspeed", c.airspeed);
    v("termination_distance", c.termination_distance);
    v("steady_wind", c.steady_wind);
    v("turbulence", c.turbulence);
    v("sensor_noise", c.sensor_noise);
    v("perturbation", c.perturbation);
    v("random_delay", c.random_delay);
    v("failures", c.failures);
    v.section("mixture", [&](V& s) {
        s("nominal", c.mixture.nominal);
        s("stuck_full_episode", c.mixture.stuck_full_episode);
        s("stuck_at_onset", c.mixture.stuck_at_onset);
    });
    v.section("dryden", [&](V& s) {
        s("altitude", c.dryden.altitude);
        s("wind20", c.dryden.wind20);
        s("intensity_scale", c.dryden.intensity_scale);
    });
    v.section("noise", [&](V& s) {
        s("rates", c.noise.rates);
        s("airspeed", c.noise.airspeed);
        s("roll_pitch", c.noise.roll_pitch);
        s("yaw", c.noise.yaw);
        s("course", c.noise.course);
        s("horizontal", c.noise.horizontal);
        s("vertical", c.noise.vertical);
        s("accel", c.noise.accel);
    });
    v.section("coefficient_perturbation", [&](V& s) {
        s("fraction", c.perturbation_fraction);
        s("floor", c.perturbation_floor);
        s("rate_divisor", c.perturbation_rate_divisor);
    });
    v.enumeration("reward_mode", c.reward_mode, reward_modes());
    v.section("path", [&](V& s) {
        s.enumeration("mode", c.path.mode, path_modes());
        s("min_segment", c.path.min_segment);
        s("max_segment", c.path.max_segment);
        s("altitude", c.path.altitude);
        s("random_heading", c.path.random_heading);
        s("lookahead", c.advance.lookahead);
        s("max_advance", c.advance.max_advance);
    });
    v.section("initial_offset", [&](V& s) {
        s("position", c.initial_offset.position);
        s("attitude", c.initial_offset.attitude);
    });
}

template <typename V>
void visit_eval(V& v, EvalConfig& c) {
    v("episodes", c.episodes);
    v("seed", c.seed);
    v("stochastic", c.stochastic);
    v("workers", c.workers);
    v.section("flutter", [&](V& s) {
        s("min_duration", c.flutter.min_duration);
        s("max_duration", c.flutter.max_duration);
        s("min_hold", c.flutter.min_hold);
        s("max_hold", c.flutter.max_hold);
        s("excursion", c.flutter.excursion);
    });
}

template <typename V>
void visit_run(V& v, RunConfig& c) {
    v("airframe", c.airframe);
    v("arch", c.arch);
    v("seed", c.seed);
    v("out", c.out);
    v.section("ppo", [&](V& s) { visit_ppo(s, c.ppo); });
    v.section("scenario", [&](V& s) { visit_env(s, c.env); });
    v.section("eval", [&](V& s) { visit_eval(s, c.eval); });
}

}  // namespace detail

/// Parses a config object. Relative airframe paths resolve against base_dir.
inline RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    detail::ConfigReader r(j, "config");
    std::string schema = kConfigSchema;
    r("schema", schema);
    if (schema != kConfigSchema) throw ConfigError("config: unsupported schema '" + schema + "'");
    detail::visit_run(r, c);
    r.finish();
    c.env.dryden.airspeed = c.env.airspeed;
    if (!c.airframe.empty() && !base_dir.empty() && std::filesystem::path(c.airframe).is_relative())
        c.airframe = (base_dir / c.airframe).lexically_normal().string();
    c.validate();
    return c;
}

inline Json run_config_to_json(const RunConfig& c) {
    RunConfig copy = c;
    detail::ConfigWriter w;
    w("schema", std::string(kConfigSchema));
    detail::visit_run(w, copy);
    return w.j;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config '" + path + "': " + e.what());
    }
    return run_config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace hyperfc
