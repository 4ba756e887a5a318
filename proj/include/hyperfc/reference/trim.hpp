// Steady-flight trim: straight, coordinated turn, and constant climb/descent.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "hyperfc/core/error.hpp"
#include "hyperfc/dynamics/actuators.hpp"
#include "hyperfc/dynamics/equations.hpp"

namespace hyperfc {

struct TrimCondition {
    double kappa = 0.0;     // inverse horizontal turn radius, 1/m (positive = right turn)
    double gamma = 0.0;     // flight-path angle, rad
    double airspeed = 21.0; // m/s

    double alpha = 0.0;
    double beta = 0.0;
    double turn_rate = 0.0;  // heading rate, rad/s

    Vec3 velocity = Vec3::Zero();  // body
    Vec3 rates = Vec3::Zero();     // body
    double phi = 0.0;
    double theta = 0.0;
    CommandVector command = CommandVector::Zero();
    Vec3 specific_force = Vec3::Zero();
    Coeff6 coeffs = Coeff6::Zero();

    double residual = 0.0;
    int iterations = 0;

    /// Trimmed aircraft at a given position and heading, actuators settled.
    AircraftState state_at(const Vec3& position, double heading) const {
        AircraftState s;
        s.position = position;
        s.velocity = velocity;
        s.euler = Vec3(phi, theta, heading);
        s.rates = rates;
        s.delta = ActuatorOutputs::from_command(command);
        return s;
    }
};

struct TrimOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
    double accept_residual = 1e-6;
};

namespace detail {

using TrimVector = Eigen::Matrix<double, 8, 1>;

/// Unknowns: alpha, beta, phi, theta, elevator, aileron, rudder, throttle.
inline AircraftState trim_state(const TrimVector& x, double kappa, double gamma, double v) {
    const double alpha = x[0], beta = x[1], phi = x[2], theta = x[3];
    const double omega = v * std::cos(gamma) * kappa;
    AircraftState s;
    s.velocity = v * Vec3(std::cos(alpha) * std::cos(beta), std::sin(beta), std::sin(alpha) * std::cos(beta));
    s.euler = Vec3(phi, theta, 0.0);
    s.rates = omega * Vec3(-std::sin(theta), std::sin(phi) * std::cos(theta), std::cos(phi) * std::cos(theta));
    s.delta = ActuatorOutputs::from_command(CommandVector(x[4], x[5], x[6], x[7]));
    return s;
}

/// Zero when translational and rotational accelerations vanish, the inertial
/// velocity climbs at gamma, and the course coincides with the heading.
inline TrimVector trim_residual(const AirframeParams& ap, const TrimVector& x, double kappa, double gamma,
                                double v) {
    const AircraftState s = trim_state(x, kappa, gamma, v);
    const StateDerivative d = state_derivative(ap, s, Vec3::Zero(), Coeff6::Zero());
    TrimVector r;
    r << d.velocity, d.rates, d.position.z() + v * std::sin(gamma), d.position.y();
    return r;
}

}  // namespace detail

/// Damped Newton with a central-difference Jacobian.
inline TrimCondition solve_trim(const AirframeParams& ap, double kappa, double gamma, double airspeed = 21.0,
                                const TrimOptions& opt = {}) {
    using detail::TrimVector;
    if (!std::isfinite(kappa) || !std::isfinite(gamma) || std::abs(gamma) >= 0.5 * kPi)
        throw ConfigError("trim: invalid (kappa, gamma)");
    if (std::abs(kappa) * ap.gravity > 0.0 &&
        std::atan(airspeed * airspeed * std::abs(kappa) / ap.gravity) > 1.2)
        throw ConfigError("trim: turn too tight for the requested airspeed");

    TrimVector x;
    x << 0.03, 0.0, std::atan(airspeed * airspeed * std::cos(gamma) * kappa / ap.gravity), gamma + 0.03, 0.0, 0.0,
        0.0, 0.5 * ap.throttle_max;
    auto res = [&](const TrimVector& z) { return detail::trim_residual(ap, z, kappa, gamma, airspeed); };

    TrimVector r = res(x);
    int it = 0;
    for (; it < opt.max_iterations && r.norm() > opt.tolerance; ++it) {
        Eigen::Matrix<double, 8, 8> jac;
        for (int j = 0; j < 8; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            TrimVector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            jac.col(j) = (res(xp) - res(xm)) / (2.0 * h);
        }
        const TrimVector dx = jac.colPivHouseholderQr().solve(-r);
        double step = 1.0;
        bool improved = false;
        for (int k = 0; k < 40; ++k, step *= 0.5) {
            const TrimVector xn = x + step * dx;
            const TrimVector rn = res(xn);
            if (rn.allFinite() && rn.norm() < r.norm()) {
                x = xn;
                r = rn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }

    const double residual = r.norm();
    auto fail = [&](const std::string& why) {
        std::ostringstream os;
        os << "trim failed for kappa=" << kappa << " gamma=" << gamma << ": " << why;
        throw TrimFailure(os.str());
    };
    if (!(residual < opt.accept_residual)) fail("residual " + std::to_string(residual));
    const CommandVector cmd(x[4], x[5], x[6], x[7]);
    if ((cmd.array() >= command_upper(ap).array()).any() || (cmd.array() <= command_lower(ap).array()).any())
        fail("required inputs saturate");

    TrimCondition t;
    t.kappa = kappa;
    t.gamma = gamma;
    t.airspeed = airspeed;
    t.alpha = x[0];
    t.beta = x[1];
    t.phi = x[2];
    t.theta = x[3];
    t.command = cmd;
    t.turn_rate = airspeed * std::cos(gamma) * kappa;
    const AircraftState s = detail::trim_state(x, kappa, gamma, airspeed);
    t.velocity = s.velocity;
    t.rates = s.rates;
    AeroOutputs aero;
    state_derivative(ap, s, Vec3::Zero(), Coeff6::Zero(), &aero);
    t.specific_force = aero.force / ap.mass;
    t.coeffs = aero.coeffs;
    t.residual = residual;
    t.iterations = it;
    return t;
}

}  // namespace hyperfc
