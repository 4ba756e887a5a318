// Control margin and the normalized observation vector.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hyperfc/core/error.hpp"
#include "hyperfc/core/failure.hpp"
#include "hyperfc/disturbances/sensors.hpp"
#include "hyperfc/dynamics/actuators.hpp"
#include "hyperfc/reference/path.hpp"

namespace hyperfc {

inline constexpr int kStateObsDim = 34;
inline constexpr int kFailureDim = 6;
inline constexpr int kActionDim = 4;
inline constexpr int kMlpObsDim = kStateObsDim + kFailureDim;

using StateObs = Eigen::Matrix<double, kStateObsDim, 1>;
using FailureObs = Eigen::Matrix<double, kFailureDim, 1>;

struct Observation {
    StateObs state = StateObs::Zero();
    FailureObs lambda = FailureObs::Zero();

    /// State and failure parts concatenated, as consumed by the plain MLP.
    Eigen::VectorXd concatenated() const {
        Eigen::VectorXd v(kMlpObsDim);
        v << state, lambda;
        return v;
    }
};

/// Element-wise min of the distances to the upper and lower limits, each
/// normalized by the reference's distance to that limit. Equals 1 at the
/// reference command and 0 at saturation.
inline CommandVector control_margin(const CommandVector& cmd, const CommandVector& ref, const CommandVector& upper,
                                    const CommandVector& lower) {
    if ((ref.array() >= upper.array()).any() || (ref.array() <= lower.array()).any())
        throw ConfigError("reference command at or beyond saturation");
    const CommandVector up = ((upper - cmd).array() / (upper - ref).array()).max(0.0);
    const CommandVector down = ((cmd - lower).array() / (ref - lower).array()).max(0.0);
    return up.cwiseMin(down);
}

/// Symmetric-saturation form used for the control surfaces.
inline CommandVector control_margin(const CommandVector& cmd, const CommandVector& ref, const CommandVector& sat) {
    return control_margin(cmd, ref, sat, -sat);
}

/// Fixed per-channel scales mapping raw quantities to roughly [-1, 1].
struct ObservationScales {
    double rates = 2.0;       // rad/s
    double airspeed = 10.0;   // m/s
    double attitude = 1.0;    // rad
    double position = 25.0;   // m
    double accel = 10.0;      // m/s^2
    double kappa = 0.02;      // 1/m
    double gamma = 0.21;      // rad
};

/// Maps each command channel from [lower, upper] to [-1, 1].
inline CommandVector normalize_command(const CommandVector& c, const CommandVector& upper, const CommandVector& lower) {
    return (2.0 * (c - lower).array() / (upper - lower).array() - 1.0).matrix();
}

struct ObservationInputs {
    Measurement measured;            // noisy
    const ReferencePoint* reference = nullptr;
    CommandVector previous_command = CommandVector::Zero();
    FailureVector lambda;
    CommandVector upper = CommandVector::Zero();
    CommandVector lower = CommandVector::Zero();
};

/// Layout (34): rate error 3, airspeed error 1, attitude error 3, body-frame
/// position error 3, specific-force error 3, reference command 4, previous
/// command 4, margin 4, [kappa gamma] 2, inertial position error 3,
/// [sin chi, cos chi] 2, [sin, cos] of course error 2. Every channel is clipped
/// to [-1, 1].
inline Observation build_observation(const ObservationInputs& in, const ObservationScales& sc = {}) {
    if (in.reference == nullptr) throw ProtocolError("observation needs a reference point");
    const ReferencePoint& ref = *in.reference;
    const Measurement& m = in.measured;
    const Vec3 dp = m.position - ref.position;
    const Vec3 dp_body = body_to_inertial(m.euler).transpose() * dp;
    const Vec3 datt(wrap_angle(m.euler.x() - ref.euler.x()), wrap_angle(m.euler.y() - ref.euler.y()),
                    wrap_angle(m.euler.z() - ref.euler.z()));
    const CommandVector margin = control_margin(in.previous_command, ref.command, in.upper, in.lower);
    const double course_err = m.course - ref.course;

    Observation o;
    StateObs& s = o.state;
    s.segment<3>(0) = (m.rates - ref.rates) / sc.rates;
    s[3] = (m.airspeed - ref.airspeed) / sc.airspeed;
    s.segment<3>(4) = datt / sc.attitude;
    s.segment<3>(7) = dp_body / sc.position;
    s.segment<3>(10) = (m.accel - ref.specific_force) / sc.accel;
    s.segment<4>(13) = normalize_command(ref.command, in.upper, in.lower);
    s.segment<4>(17) = normalize_command(in.previous_command, in.upper, in.lower);
    s.segment<4>(21) = (2.0 * margin.array() - 1.0).matrix();
    s[25] = ref.kappa / sc.kappa;
    s[26] = ref.gamma / sc.gamma;
    s.segment<3>(27) = dp / sc.position;
    s[30] = std::sin(m.course);
    s[31] = std::cos(m.course);
    s[32] = std::sin(course_err);
    s[33] = std::cos(course_err);
    for (int i = 0; i < kStateObsDim; ++i) {
        if (!std::isfinite(s[i])) s[i] = 0.0;
        s[i] = std::clamp(s[i], -1.0, 1.0);
    }
    o.lambda = in.lambda.as_vector();
    return o;
}

}  // namespace hyperfc
