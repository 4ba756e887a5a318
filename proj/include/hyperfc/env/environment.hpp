// Path-following environment with failure injection and stochastic disturbances.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyperfc/core/json_io.hpp"
#include "hyperfc/core/rng.hpp"
#include "hyperfc/disturbances/delay.hpp"
#include "hyperfc/disturbances/perturbation.hpp"
#include "hyperfc/disturbances/sensors.hpp"
#include "hyperfc/disturbances/wind.hpp"
#include "hyperfc/dynamics/actuators.hpp"
#include "hyperfc/dynamics/equations.hpp"
#include "hyperfc/env/observation.hpp"
#include "hyperfc/env/reward.hpp"
#include "hyperfc/env/scenario.hpp"
#include "hyperfc/reference/path.hpp"

namespace hyperfc {

enum class Termination { None, Divergence, PositionError, PathComplete, Horizon };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::None: return "none";
        case Termination::Divergence: return "divergence";
        case Termination::PositionError: return "position_error";
        case Termination::PathComplete: return "path_complete";
        case Termination::Horizon: return "horizon";
    }
    return "?";
}

/// True when the episode ended in a failure state (no bootstrapping past it).
inline bool is_terminal_failure(Termination t) {
    return t == Termination::Divergence || t == Termination::PositionError;
}

/// Random perturbation of the initial state away from the trimmed reference.
struct InitialOffset {
    double position = 0.0;  // m, uniform per axis
    double attitude = 0.0;  // rad, uniform on phi, theta, psi
};

struct EnvConfig {
    double dt = 0.04;
    int horizon = 750;
    double airspeed = 21.0;
    double termination_distance = 25.0;  // <= 0 disables

    bool steady_wind = true;
    bool turbulence = true;
    DrydenConfig dryden;
    bool sensor_noise = true;
    SensorNoiseSpec noise;
    bool perturbation = true;
    double perturbation_fraction = 0.1;
    double perturbation_floor = 0.01;
    double perturbation_rate_divisor = 25.0;
    bool random_delay = true;

    bool failures = true;
    ScenarioMixture mixture;

    RewardMode reward_mode = RewardMode::Dense;
    TrackingGains tracking_gains;
    InputRewardGains input_gains;
    BandedTolerances banded;

    PathConfig path;
    AdvanceConfig advance;
    InitialOffset initial_offset;
    ObservationScales scales;

    /// Everything off: calm air, exact sensors, nominal coefficients, no delay, no failures.
    static EnvConfig disturbance_free() {
        EnvConfig c;
        c.steady_wind = false;
        c.turbulence = false;
        c.sensor_noise = false;
        c.perturbation = false;
        c.random_delay = false;
        c.failures = false;
        return c;
    }
};

struct StepResult {
    Observation obs;
    RewardBreakdown reward;
    bool done = false;
    Termination cause = Termination::None;
    double position_error = 0.0;  // true 3-D distance to the reference point
    FailureVector lambda;         // failure vector applied during this step
    CommandVector command = CommandVector::Zero();  // policy command, before delay
};

/// Tracking errors of the true state against a reference sample.
inline TrackingErrors tracking_errors(const AircraftState& s, const ReferencePoint& ref) {
    TrackingErrors e;
    e.segment<3>(0) = s.rates - ref.rates;
    e[3] = wrap_angle(s.euler.x() - ref.euler.x());
    e[4] = wrap_angle(s.euler.y() - ref.euler.y());
    double chi = s.euler.z();
    const Vec3 pdot = s.inertial_velocity();
    if (std::hypot(pdot.x(), pdot.y()) > 0.0) chi = path_angles(pdot).chi;
    e[5] = wrap_angle(chi - ref.course);
    e.segment<3>(6) = body_to_inertial(s.euler).transpose() * (s.position - ref.position);
    return e;
}

inline Json state_to_json(const AircraftState& s) {
    const auto& d = s.delta;
    return {{"p", to_json_array(s.position)},
            {"v", to_json_array(s.velocity)},
            {"euler", to_json_array(s.euler)},
            {"omega", to_json_array(s.rates)},
            {"delta", {d.elevator, d.aileron_left, d.aileron_right, d.rudder, d.throttle}}};
}

inline AircraftState state_from_json(const Json& j) {
    AircraftState s;
    s.position = from_json_array<Vec3>(j.at("p"), 3);
    s.velocity = from_json_array<Vec3>(j.at("v"), 3);
    s.euler = from_json_array<Vec3>(j.at("euler"), 3);
    s.rates = from_json_array<Vec3>(j.at("omega"), 3);
    const auto d = from_json_array<Eigen::Matrix<double, 5, 1>>(j.at("delta"), 5);
    s.delta = {d[0], d[1], d[2], d[3], d[4]};
    return s;
}

class Environment {
public:
    Environment(AirframeParams ap, EnvConfig cfg, std::shared_ptr<const TrimTable> trims = nullptr)
        : ap_(std::move(ap)), cfg_(std::move(cfg)), trims_(std::move(trims)) {
        ap_.validate();
        if (cfg_.horizon <= 0) throw ConfigError("horizon must be positive");
        if (!(cfg_.dt > 0.0)) throw ConfigError("dt must be positive");
        if (!trims_) trims_ = std::make_shared<TrimTable>(ap_, cfg_.airspeed);
        DrydenConfig dc = cfg_.dryden;
        dc.airspeed = cfg_.airspeed;
        wind_ = WindModel(dc, cfg_.dt);
        pert_bounds_ = perturbation_bounds_from_trim(trims_->at(0.0, 0.0).coeffs, cfg_.perturbation_fraction,
                                                     cfg_.perturbation_floor, cfg_.perturbation_rate_divisor);
        upper_ = command_upper(ap_);
        lower_ = command_lower(ap_);
    }

    const AirframeParams& airframe() const { return ap_; }
    const EnvConfig& config() const { return cfg_; }
    const std::shared_ptr<const TrimTable>& trims() const { return trims_; }

    /// Starts an episode. All randomness is derived from `seed`; a given
    /// scenario replaces the sampled one.
    Observation reset(std::uint64_t seed, const std::optional<ScenarioSpec>& scenario = std::nullopt) {
        seed_ = seed;
        Rng path_rng(mix_seed(seed, 0));
        Rng scenario_rng(mix_seed(seed, 1));
        Rng init_rng(mix_seed(seed, 2));
        wind_rng_ = Rng(mix_seed(seed, 3));
        noise_rng_ = Rng(mix_seed(seed, 4));
        pert_rng_ = Rng(mix_seed(seed, 5));

        path_ = sample_path(path_rng, *trims_, cfg_.path, cfg_.horizon + cfg_.advance.lookahead + 1, cfg_.dt);

        if (scenario) scenario_ = *scenario;
        else if (cfg_.failures) scenario_ = sample_training_scenario(scenario_rng, cfg_.horizon, cfg_.mixture);
        else scenario_ = ScenarioSpec{};
        delay_.reset(cfg_.random_delay ? scenario_rng.uniform_int(0, 1) : 0);

        const ReferencePoint& r0 = path_[0];
        const TrimCondition& trim = trims_->at(r0.kappa, r0.gamma);
        state_ = trim.state_at(r0.position, r0.euler.z());
        if (cfg_.initial_offset.position > 0.0)
            for (int i = 0; i < 3; ++i)
                state_.position[i] += init_rng.uniform(-cfg_.initial_offset.position, cfg_.initial_offset.position);
        if (cfg_.initial_offset.attitude > 0.0) {
            for (int i = 0; i < 3; ++i)
                state_.euler[i] += init_rng.uniform(-cfg_.initial_offset.attitude, cfg_.initial_offset.attitude);
            state_.euler = wrap_angles(state_.euler);
        }

        wind_.set_steady(cfg_.steady_wind ? sample_steady_wind(wind_rng_) : Vec3::Zero());
        if (cfg_.turbulence) wind_.reset_stationary(wind_rng_);
        else wind_.reset_filters();
        // Start at the trim airspeed relative to the air mass.
        state_.velocity += body_to_inertial(state_.euler).transpose() * wind_.steady();

        pert_ = pert_bounds_;
        pert_.value.setZero();
        if (!cfg_.perturbation) pert_.magnitude.setZero(), pert_.rate.setZero();

        k_ = 0;
        idx_ = 0;
        done_ = false;
        cause_ = Termination::None;
        prev_cmd_ = r0.command;
        lambda_ = failure_at(scenario_, 0);
        state_.delta = apply_failure_override(ap_, state_.delta, lambda_);
        gust_ = Vec3::Zero();
        perturb_ = Coeff6::Zero();
        obs_ = observe();
        return obs_;
    }

    StepResult step(const CommandVector& action) {
        if (path_.empty()) throw ProtocolError("step called before reset");
        if (done_) throw ProtocolError("step called on a finished episode");
        if (!action.allFinite()) throw NumericError("non-finite action");

        const ReferencePoint& ref = path_[idx_];
        const CommandVector cmd = command_from_action(action, ref.command);
        const FailureVector lambda = failure_at(scenario_, k_);
        const CommandVector applied = delay_.push(cmd, ref.command);
        state_.delta = actuator_step(ap_, state_.delta, applied, lambda, cfg_.dt);

        gust_ = cfg_.turbulence ? wind_.dryden_step(wind_rng_, state_.euler.z()) : Vec3::Zero();
        perturb_ = cfg_.perturbation ? perturb_step(pert_, pert_rng_) : Coeff6::Zero();

        StepResult out;
        out.command = cmd;
        out.lambda = lambda;
        lambda_ = lambda;
        ++k_;
        try {
            state_ = rk4_step(ap_, state_, total_wind(), perturb_, cfg_.dt);
            state_.euler.x() = wrap_angle(state_.euler.x());
            state_.euler.z() = wrap_angle(state_.euler.z());
            if (std::abs(state_.euler.y()) > 1.5) throw IntegrationFailure("pitch attitude left the valid range");
            (void)compute_aero(ap_, state_, total_wind(), perturb_);  // airspeed validity
        } catch (const NumericError&) {
            cause_ = Termination::Divergence;
        }

        if (cause_ != Termination::Divergence) {
            const AdvanceResult adv = advance_reference(path_, state_.position, idx_, cfg_.advance);
            idx_ = adv.index;
            const ReferencePoint& now = path_[idx_];
            const TrackingErrors err = tracking_errors(state_, now);
            const CommandVector margin = control_margin(cmd, ref.command, upper_, lower_);
            out.reward.tracking = cfg_.reward_mode == RewardMode::Dense ? tracking_reward(err, cfg_.tracking_gains)
                                                                        : banded_reward(err, cfg_.banded);
            out.reward.barrier = margin_barrier(margin, cfg_.input_gains);
            out.reward.rate = rate_penalty(rate_units(cmd), rate_units(prev_cmd_), cfg_.input_gains);
            out.reward.total = out.reward.tracking + out.reward.barrier + out.reward.rate;
            out.position_error = (state_.position - now.position).norm();

            if (cfg_.termination_distance > 0.0 && out.position_error > cfg_.termination_distance)
                cause_ = Termination::PositionError;
            else if (adv.complete)
                cause_ = Termination::PathComplete;
            else if (k_ >= cfg_.horizon)
                cause_ = Termination::Horizon;
            prev_cmd_ = cmd;
            obs_ = observe();
        } else {
            out.position_error = std::isfinite(state_.position.norm())
                                     ? (state_.position - path_[idx_].position).norm()
                                     : std::numeric_limits<double>::infinity();
        }
        done_ = cause_ != Termination::None;
        out.done = done_;
        out.cause = cause_;
        out.obs = obs_;
        return out;
    }

    /// Policy output in [-1, 1] scaled by the symmetric headroom around the reference.
    CommandVector command_from_action(const CommandVector& action, const CommandVector& ref_cmd) const {
        const CommandVector a = action.cwiseMax(-1.0).cwiseMin(1.0);
        const CommandVector headroom = (upper_ - ref_cmd).cwiseMin(ref_cmd - lower_);
        return ref_cmd + a.cwiseProduct(headroom);
    }

    const Observation& observation() const { return obs_; }
    const AircraftState& state() const { return state_; }
    const ReferencePath& path() const { return path_; }
    const ReferencePoint& reference() const { return path_[idx_]; }
    std::size_t reference_index() const { return idx_; }
    int step_index() const { return k_; }
    bool done() const { return done_; }
    Termination cause() const { return cause_; }
    const ScenarioSpec& scenario() const { return scenario_; }
    const FailureVector& lambda() const { return lambda_; }
    int delay_steps() const { return delay_.steps(); }
    Vec3 total_wind() const { return wind_.steady() + gust_; }
    const Coeff6& perturbation() const { return perturb_; }
    std::uint64_t seed() const { return seed_; }

    /// Full dynamic state. Restoring regenerates the path from the seed.
    Json save_state() const {
        Json pending = nullptr;
        if (delay_.pending()) pending = to_json_array(*delay_.pending());
        return {{"seed", seed_},
                {"scenario", scenario_to_json(scenario_)},
                {"delay", delay_.steps()},
                {"pending", pending},
                {"state", state_to_json(state_)},
                {"k", k_},
                {"idx", idx_},
                {"done", done_},
                {"cause", static_cast<int>(cause_)},
                {"prev_cmd", to_json_array(prev_cmd_)},
                {"lambda", to_json_array(lambda_.as_vector())},
                {"steady_wind", to_json_array(wind_.steady())},
                {"gust", to_json_array(gust_)},
                {"wind_filters", wind_.filter_state()},
                {"pert_value", to_json_array(pert_.value)},
                {"perturb", to_json_array(perturb_)},
                {"wind_rng", wind_rng_.serialize()},
                {"noise_rng", noise_rng_.serialize()},
                {"pert_rng", pert_rng_.serialize()},
                {"obs_state", to_json_array(obs_.state)},
                {"obs_lambda", to_json_array(obs_.lambda)}};
    }

    void load_state(const Json& j) {
        reset(j.at("seed").get<std::uint64_t>(), scenario_from_json(j.at("scenario")));
        delay_.reset(j.at("delay").get<int>());
        if (!j.at("pending").is_null()) delay_.set_pending(from_json_array<CommandVector>(j.at("pending"), 4));
        state_ = state_from_json(j.at("state"));
        k_ = j.at("k").get<int>();
        idx_ = j.at("idx").get<std::size_t>();
        if (idx_ >= path_.size()) throw IoError("saved reference index outside regenerated path");
        done_ = j.at("done").get<bool>();
        cause_ = static_cast<Termination>(j.at("cause").get<int>());
        prev_cmd_ = from_json_array<CommandVector>(j.at("prev_cmd"), 4);
        const auto lam = from_json_array<Eigen::Matrix<double, 6, 1>>(j.at("lambda"), 6);
        lambda_ = FailureVector();
        for (int a = 0; a < kNumFailActuators; ++a)
            if (lam[2 * a] == 1.0) lambda_.set_stuck(static_cast<FailActuator>(a), lam[2 * a + 1]);
        wind_.set_steady(from_json_array<Vec3>(j.at("steady_wind"), 3));
        gust_ = from_json_array<Vec3>(j.at("gust"), 3);
        wind_.set_filter_state(j.at("wind_filters").get<std::vector<double>>());
        pert_.value = from_json_array<Coeff6>(j.at("pert_value"), 6);
        perturb_ = from_json_array<Coeff6>(j.at("perturb"), 6);
        wind_rng_ = Rng::deserialize(j.at("wind_rng").get<std::string>());
        noise_rng_ = Rng::deserialize(j.at("noise_rng").get<std::string>());
        pert_rng_ = Rng::deserialize(j.at("pert_rng").get<std::string>());
        obs_.state = from_json_array<StateObs>(j.at("obs_state"), kStateObsDim);
        obs_.lambda = from_json_array<FailureObs>(j.at("obs_lambda"), kFailureDim);
    }

private:
    /// Throttle expressed as a fraction of its range so all rate terms are O(1).
    CommandVector rate_units(const CommandVector& c) const {
        CommandVector u = c;
        u[kThrottle] /= ap_.throttle_max;
        return u;
    }

    Measurement measure() const {
        Measurement m;
        m.rates = state_.rates;
        m.euler = state_.euler;
        m.position = state_.position;
        const AeroOutputs aero = compute_aero(ap_, state_, total_wind(), perturb_);
        m.airspeed = aero.air.airspeed;
        m.accel = aero.force / ap_.mass;
        const Vec3 pdot = state_.inertial_velocity();
        m.course = std::hypot(pdot.x(), pdot.y()) > 0.0 ? path_angles(pdot).chi : state_.euler.z();
        return m;
    }

    Observation observe() {
        Measurement m = measure();
        if (cfg_.sensor_noise) m = apply_sensor_noise(m, cfg_.noise, noise_rng_);
        return assemble(m);
    }

    Observation assemble(const Measurement& m) const {
        ObservationInputs in;
        in.measured = m;
        in.reference = &path_[idx_];
        in.previous_command = prev_cmd_;
        in.lambda = lambda_;
        in.upper = upper_;
        in.lower = lower_;
        return build_observation(in, cfg_.scales);
    }

    AirframeParams ap_;
    EnvConfig cfg_;
    std::shared_ptr<const TrimTable> trims_;
    WindModel wind_;
    CoeffPerturbation pert_bounds_;
    CommandVector upper_ = CommandVector::Zero();
    CommandVector lower_ = CommandVector::Zero();

    std::uint64_t seed_ = 0;
    Rng wind_rng_, noise_rng_, pert_rng_;
    ReferencePath path_;
    ScenarioSpec scenario_;
    CommandDelay delay_;
    AircraftState state_;
    CoeffPerturbation pert_;
    Vec3 gust_ = Vec3::Zero();
    Coeff6 perturb_ = Coeff6::Zero();
    int k_ = 0;
    std::size_t idx_ = 0;
    bool done_ = false;
    Termination cause_ = Termination::None;
    CommandVector prev_cmd_ = CommandVector::Zero();
    FailureVector lambda_;
    Observation obs_;
};

}  // namespace hyperfc
