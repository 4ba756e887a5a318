// Small geometry helpers: rotations, Euler kinematics, angle wrapping.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace hyperfc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

/// R_Ib: body -> inertial (NED), ZYX Euler sequence (phi, theta, psi).
inline Mat3 body_to_inertial(const Vec3& euler) {
    const double cf = std::cos(euler.x()), sf = std::sin(euler.x());
    const double ct = std::cos(euler.y()), st = std::sin(euler.y());
    const double cp = std::cos(euler.z()), sp = std::sin(euler.z());
    Mat3 r;
    r << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
         ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
         -st,     sf * ct,                cf * ct;
    return r;
}

/// Maps body rates to Euler angle rates. Singular at |theta| = pi/2.
inline Mat3 euler_rate_matrix(double phi, double theta) {
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double ct = std::cos(theta), tt = std::tan(theta);
    Mat3 e;
    e << 1.0, sf * tt, cf * tt,
         0.0, cf, -sf,
         0.0, sf / ct, cf / ct;
    return e;
}

inline Vec3 wrap_angles(const Vec3& a) {
    return {wrap_angle(a.x()), wrap_angle(a.y()), wrap_angle(a.z())};
}

}  // namespace hyperfc
