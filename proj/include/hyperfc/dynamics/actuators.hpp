// First-order actuators with saturation and stuck-failure overrides.
#pragma once

#include <algorithm>
#include <cmath>

#include "hyperfc/core/failure.hpp"
#include "hyperfc/dynamics/airframe.hpp"
#include "hyperfc/dynamics/state.hpp"

namespace hyperfc {

inline CommandVector command_upper(const AirframeParams& ap) {
    return {ap.elevator_sat, ap.aileron_sat, ap.rudder_sat, ap.throttle_max};
}

inline CommandVector command_lower(const AirframeParams& ap) {
    return {-ap.elevator_sat, -ap.aileron_sat, -ap.rudder_sat, 0.0};
}

inline CommandVector saturate_command(const AirframeParams& ap, const CommandVector& cmd) {
    return cmd.cwiseMax(command_lower(ap)).cwiseMin(command_upper(ap));
}

/// Saturation magnitude of the actuator a failure channel refers to.
inline double failure_saturation(const AirframeParams& ap, FailActuator a) {
    return a == FailActuator::Rudder ? ap.rudder_sat : ap.aileron_sat;
}

/// Forces every failed surface to lambda_val * delta_sat.
inline ActuatorOutputs apply_failure_override(const AirframeParams& ap, ActuatorOutputs d,
                                              const FailureVector& lambda) {
    if (lambda.failed(FailActuator::RightAileron))
        d.aileron_right = lambda.level(FailActuator::RightAileron) * ap.aileron_sat;
    if (lambda.failed(FailActuator::LeftAileron))
        d.aileron_left = lambda.level(FailActuator::LeftAileron) * ap.aileron_sat;
    if (lambda.failed(FailActuator::Rudder))
        d.rudder = lambda.level(FailActuator::Rudder) * ap.rudder_sat;
    return d;
}

/// Exact first-order lag over dt toward the saturated command, then failure
/// overrides, then clipping to the actuator range.
inline ActuatorOutputs actuator_step(const AirframeParams& ap, const ActuatorOutputs& d,
                                     const CommandVector& cmd, const FailureVector& lambda,
                                     double dt) {
    const CommandVector target = saturate_command(ap, cmd);
    const double ks = std::exp(-dt / ap.tau_surface);
    const double kt = std::exp(-dt / ap.tau_throttle);
    auto lag = [](double now, double tgt, double k) { return tgt + (now - tgt) * k; };

    ActuatorOutputs out;
    out.elevator = lag(d.elevator, target[kElevator], ks);
    out.aileron_left = lag(d.aileron_left, target[kAileron], ks);
    out.aileron_right = lag(d.aileron_right, target[kAileron], ks);
    out.rudder = lag(d.rudder, target[kRudder], ks);
    out.throttle = lag(d.throttle, target[kThrottle], kt);
    out = apply_failure_override(ap, out, lambda);

    out.elevator = std::clamp(out.elevator, -ap.elevator_sat, ap.elevator_sat);
    out.aileron_left = std::clamp(out.aileron_left, -ap.aileron_sat, ap.aileron_sat);
    out.aileron_right = std::clamp(out.aileron_right, -ap.aileron_sat, ap.aileron_sat);
    out.rudder = std::clamp(out.rudder, -ap.rudder_sat, ap.rudder_sat);
    out.throttle = std::clamp(out.throttle, 0.0, ap.throttle_max);
    return out;
}

}  // namespace hyperfc
