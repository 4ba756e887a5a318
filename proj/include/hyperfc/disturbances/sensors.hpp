// Measurement vector and additive Gaussian sensor noise.
#pragma once

#include "hyperfc/core/math.hpp"
#include "hyperfc/core/rng.hpp"

namespace hyperfc {

/// Onboard measurements: rates, airspeed, attitude, position, specific force,
/// plus the course angle derived from the navigation solution.
struct Measurement {
    Vec3 rates = Vec3::Zero();
    double airspeed = 0.0;
    Vec3 euler = Vec3::Zero();
    Vec3 position = Vec3::Zero();
    Vec3 accel = Vec3::Zero();
    double course = 0.0;
};

struct SensorNoiseSpec {
    double rates = 0.01;     // rad/s
    double airspeed = 2.0;   // m/s
    double roll_pitch = 0.01; // rad
    double yaw = 0.1;        // rad
    double course = 0.02;    // rad
    double horizontal = 0.03; // m, x and y
    double vertical = 0.01;  // m
    double accel = 0.03;     // m/s^2

    static SensorNoiseSpec none() {
        return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    }
};

/// Independent zero-mean Gaussian noise on every channel. Angles are perturbed
/// as angles and wrapped; trigonometric encoding happens downstream.
inline Measurement apply_sensor_noise(const Measurement& m, const SensorNoiseSpec& spec, Rng& rng) {
    Measurement out = m;
    for (int i = 0; i < 3; ++i) out.rates[i] += rng.normal(0.0, spec.rates);
    out.airspeed += rng.normal(0.0, spec.airspeed);
    out.euler.x() = wrap_angle(out.euler.x() + rng.normal(0.0, spec.roll_pitch));
    out.euler.y() += rng.normal(0.0, spec.roll_pitch);
    out.euler.z() = wrap_angle(out.euler.z() + rng.normal(0.0, spec.yaw));
    out.position.x() += rng.normal(0.0, spec.horizontal);
    out.position.y() += rng.normal(0.0, spec.horizontal);
    out.position.z() += rng.normal(0.0, spec.vertical);
    for (int i = 0; i < 3; ++i) out.accel[i] += rng.normal(0.0, spec.accel);
    out.course = wrap_angle(out.course + rng.normal(0.0, spec.course));
    return out;
}

}  // namespace hyperfc
