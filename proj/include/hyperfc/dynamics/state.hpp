#pragma once

#include <Eigen/Dense>

#include "hyperfc/core/math.hpp"

namespace hyperfc {

/// Commanded inputs: elevator, aileron (drives both surfaces), rudder, throttle.
using CommandVector = Eigen::Vector4d;

enum CommandChannel : int { kElevator = 0, kAileron = 1, kRudder = 2, kThrottle = 3 };

/// Realized actuator outputs. Surfaces in rad, throttle in rev/s.
struct ActuatorOutputs {
    double elevator = 0.0;
    double aileron_left = 0.0;
    double aileron_right = 0.0;
    double rudder = 0.0;
    double throttle = 0.0;

    double aileron_effective() const { return 0.5 * (aileron_left + aileron_right); }
    double aileron_differential() const { return aileron_right - aileron_left; }

    /// Symmetric actuator set matching a command vector.
    static ActuatorOutputs from_command(const CommandVector& c) {
        return {c[kElevator], c[kAileron], c[kAileron], c[kRudder], c[kThrottle]};
    }

    friend bool operator==(const ActuatorOutputs&, const ActuatorOutputs&) = default;
};

struct AircraftState {
    Vec3 position = Vec3::Zero();  // NED, m
    Vec3 velocity = Vec3::Zero();  // body frame, m/s
    Vec3 euler = Vec3::Zero();     // phi, theta, psi, rad
    Vec3 rates = Vec3::Zero();     // p, q, r, rad/s
    ActuatorOutputs delta;

    Eigen::Matrix<double, 12, 1> rigid_body() const {
        Eigen::Matrix<double, 12, 1> x;
        x << position, velocity, euler, rates;
        return x;
    }

    void set_rigid_body(const Eigen::Matrix<double, 12, 1>& x) {
        position = x.segment<3>(0);
        velocity = x.segment<3>(3);
        euler = x.segment<3>(6);
        rates = x.segment<3>(9);
    }

    Vec3 inertial_velocity() const { return body_to_inertial(euler) * velocity; }
};

}  // namespace hyperfc
