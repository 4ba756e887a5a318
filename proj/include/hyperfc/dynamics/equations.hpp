// Rigid-body equations of motion and fixed-step RK4 integration.
#pragma once

#include <cmath>

#include "hyperfc/core/error.hpp"
#include "hyperfc/dynamics/aero.hpp"

namespace hyperfc {

struct StateDerivative {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 euler = Vec3::Zero();
    Vec3 rates = Vec3::Zero();

    Eigen::Matrix<double, 12, 1> packed() const {
        Eigen::Matrix<double, 12, 1> x;
        x << position, velocity, euler, rates;
        return x;
    }
};

/// p' = R v, theta' = E(phi, theta) w, v' = v x w + R^T [0 0 g] + F/m,
/// w' = J^-1 (J w x w + M). Actuator outputs are treated as inputs.
inline StateDerivative state_derivative(const AirframeParams& ap, const AircraftState& s,
                                        const Vec3& wind, const Coeff6& perturb,
                                        AeroOutputs* aero_out = nullptr) {
    const AeroOutputs aero = compute_aero(ap, s, wind, perturb);
    const Mat3 r = body_to_inertial(s.euler);
    const Mat3 j = ap.inertia();

    StateDerivative d;
    d.position = r * s.velocity;
    d.euler = euler_rate_matrix(s.euler.x(), s.euler.y()) * s.rates;
    d.velocity = s.velocity.cross(s.rates) + r.transpose() * Vec3(0.0, 0.0, ap.gravity) +
                 aero.force / ap.mass;
    d.rates = j.ldlt().solve((j * s.rates).cross(s.rates) + aero.moment);
    if (aero_out) *aero_out = aero;
    return d;
}

/// Accelerometer reading: non-gravitational acceleration F/m in body axes.
inline Vec3 specific_force(const AirframeParams& ap, const AircraftState& s, const Vec3& wind,
                           const Coeff6& perturb) {
    return compute_aero(ap, s, wind, perturb).force / ap.mass;
}

/// Classical RK4 on (p, v, theta, w); actuator outputs held over the step.
inline AircraftState rk4_step(const AirframeParams& ap, const AircraftState& s, const Vec3& wind,
                              const Coeff6& perturb, double dt) {
    using Vec12 = Eigen::Matrix<double, 12, 1>;
    auto f = [&](const Vec12& x) {
        AircraftState tmp = s;
        tmp.set_rigid_body(x);
        return state_derivative(ap, tmp, wind, perturb).packed();
    };
    const Vec12 x0 = s.rigid_body();
    const Vec12 k1 = f(x0);
    const Vec12 k2 = f(x0 + 0.5 * dt * k1);
    const Vec12 k3 = f(x0 + 0.5 * dt * k2);
    const Vec12 k4 = f(x0 + dt * k3);
    const Vec12 x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x1.allFinite()) throw IntegrationFailure("non-finite state after RK4 step");
    AircraftState out = s;
    out.set_rigid_body(x1);
    return out;
}

struct PathAngles {
    double gamma = 0.0;  // flight-path angle, positive climbing
    double chi = 0.0;    // course angle
};

inline PathAngles path_angles(const Vec3& p_dot) {
    const double horiz = std::hypot(p_dot.x(), p_dot.y());
    if (horiz == 0.0) throw NumericError("course undefined for zero horizontal velocity");
    return {std::atan2(-p_dot.z(), horiz), std::atan2(p_dot.y(), p_dot.x())};
}

}  // namespace hyperfc
