// Air data and aerodynamic force/moment model.
#pragma once

#include <cmath>
#include <string>

#include "hyperfc/core/error.hpp"
#include "hyperfc/dynamics/airframe.hpp"
#include "hyperfc/dynamics/state.hpp"

namespace hyperfc {

/// Ordered [C_X, C_Y, C_Z, C_L, C_M, C_N]: body forces then roll/pitch/yaw moments.
using Coeff6 = Eigen::Matrix<double, 6, 1>;

struct AirData {
    double airspeed = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

struct AeroOutputs {
    AirData air;
    double qbar = 0.0;
    Coeff6 coeffs = Coeff6::Zero();
    Vec3 force = Vec3::Zero();   // body, N
    Vec3 moment = Vec3::Zero();  // body, N m
};

/// v_r = v - R_Ib^T v_w.
inline Vec3 air_relative_velocity(const AircraftState& s, const Vec3& wind_inertial) {
    return s.velocity - body_to_inertial(s.euler).transpose() * wind_inertial;
}

inline AirData aero_angles(const Vec3& v_rel, double min_airspeed) {
    const double vr = v_rel.norm();
    if (!(vr > min_airspeed))
        throw LowAirspeedError("airspeed " + std::to_string(vr) + " m/s below validity floor");
    // atan2 coincides with arctan(w/u) for forward flight and stays defined for u <= 0.
    return {vr, std::atan2(v_rel.z(), v_rel.x()), std::asin(v_rel.y() / vr)};
}

/// Non-dimensional rates (p b / 2V, q c / 2V, r b / 2V).
inline Vec3 nondimensional_rates(const AirframeParams& ap, const Vec3& rates, double airspeed) {
    return {rates.x() * ap.span / (2.0 * airspeed), rates.y() * ap.chord / (2.0 * airspeed),
            rates.z() * ap.span / (2.0 * airspeed)};
}

/// Coefficient model plus additive perturbation. Ailerons enter through their
/// effective (mean) deflection; the differential deflection adds a pitching term.
inline Coeff6 aero_coefficients(const AirframeParams& ap, const AirData& air, const Vec3& rates_hat,
                                const ActuatorOutputs& d, const Coeff6& perturb) {
    const AeroDerivatives& c = ap.aero;
    const double a = air.alpha, b = air.beta;
    const double ph = rates_hat.x(), qh = rates_hat.y(), rh = rates_hat.z();
    const double da = d.aileron_effective();
    const double dd = d.aileron_differential();
    const double adv = d.throttle * ap.prop_diameter / air.airspeed;  // inverse advance ratio

    const double lift = c.lift0 + c.lift_alpha * a + c.lift_q * qh + c.lift_de * d.elevator;
    const double drag = c.drag0 + c.drag_k * lift * lift;
    const double thrust = c.thrust0 + c.thrust1 * adv + c.thrust2 * adv * adv;

    Coeff6 out;
    out[0] = -drag * std::cos(a) + lift * std::sin(a) + thrust;
    out[1] = c.side_beta * b + c.side_p * ph + c.side_r * rh + c.side_da * da + c.side_dr * d.rudder;
    out[2] = -drag * std::sin(a) - lift * std::cos(a);
    out[3] = c.roll_beta * b + c.roll_p * ph + c.roll_r * rh + c.roll_da * da + c.roll_dr * d.rudder;
    out[4] = c.pitch0 + c.pitch_alpha * a + c.pitch_q * qh + c.pitch_de * d.elevator +
             c.pitch_da_diff * dd;
    out[5] = c.yaw_beta * b + c.yaw_p * ph + c.yaw_r * rh + c.yaw_da * da + c.yaw_dr * d.rudder;
    return out + perturb;
}

/// F = qbar S [C_X C_Y C_Z], M = qbar S [C_L b, C_M c, C_N b].
inline void coefficients_to_loads(const AirframeParams& ap, double qbar, const Coeff6& cf, Vec3& force,
                                  Vec3& moment) {
    const double qs = qbar * ap.area;
    force = qs * cf.head<3>();
    moment = {qs * cf[3] * ap.span, qs * cf[4] * ap.chord, qs * cf[5] * ap.span};
}

inline AeroOutputs compute_aero(const AirframeParams& ap, const AircraftState& s, const Vec3& wind,
                                const Coeff6& perturb) {
    AeroOutputs out;
    out.air = aero_angles(air_relative_velocity(s, wind), ap.min_airspeed);
    out.qbar = 0.5 * ap.air_density * out.air.airspeed * out.air.airspeed;
    out.coeffs = aero_coefficients(ap, out.air, nondimensional_rates(ap, s.rates, out.air.airspeed),
                                   s.delta, perturb);
    coefficients_to_loads(ap, out.qbar, out.coeffs, out.force, out.moment);
    return out;
}

}  // namespace hyperfc
