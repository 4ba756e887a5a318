// Steady wind sampling and Dryden turbulence (low-altitude form).
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hyperfc/core/math.hpp"
#include "hyperfc/core/rng.hpp"

namespace hyperfc {

inline constexpr double kFeetToMeters = 0.3048;
inline constexpr double kKnotsToMps = 0.514444;

/// Horizontal wind, magnitude uniform in [min, max], heading uniform in [0, 2 pi).
inline Vec3 sample_steady_wind(Rng& rng, double min_speed = 3.0, double max_speed = 5.0) {
    const double mag = rng.uniform(min_speed, max_speed);
    const double heading = rng.uniform(0.0, 2.0 * kPi);
    return {mag * std::cos(heading), mag * std::sin(heading), 0.0};
}

struct DrydenConfig {
    double altitude = 100.0;             // m above ground, sets scale lengths
    double wind20 = 30.0 * kKnotsToMps;  // reference wind at 20 ft
    double airspeed = 21.0;              // m/s, converts spatial to temporal scales
    double intensity_scale = 1.0;        // 0 disables turbulence
};

/// Intensities (m/s) and scale lengths (m) for the three gust axes.
struct DrydenIntensity {
    Vec3 sigma = Vec3::Zero();
    Vec3 scale = Vec3::Ones();
};

/// MIL-F-8785C low-altitude relations; altitude is clamped to [10, 1000] ft.
inline DrydenIntensity dryden_intensity(const DrydenConfig& cfg) {
    const double h = std::clamp(cfg.altitude / kFeetToMeters, 10.0, 1000.0);
    const double denom = 0.177 + 0.000823 * h;
    const double sigma_w = 0.1 * cfg.wind20 * cfg.intensity_scale;
    const double sigma_uv = sigma_w / std::pow(denom, 0.4);
    const double l_uv = h / std::pow(denom, 1.2) * kFeetToMeters;
    const double l_w = h * kFeetToMeters;
    return {Vec3(sigma_uv, sigma_uv, sigma_w), Vec3(l_uv, l_uv, l_w)};
}

/// One gust axis as a sampled linear system x' = Ad x + w, w ~ N(0, Qd), y = C x.
/// The discretization is exact for the continuous shaping filter driven by
/// white noise, so the sampled output variance equals sigma^2 for any dt.
struct GustAxisFilter {
    Eigen::MatrixXd ad;
    Eigen::MatrixXd noise_chol;
    Eigen::MatrixXd stationary_chol;  // factor of the stationary state covariance
    Eigen::RowVectorXd c;
};

namespace detail {

inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

inline GustAxisFilter discretize_gust(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const Eigen::RowVectorXd& c, double dt) {
    // White-noise intensity pi makes the Dryden transfer functions produce
    // variance sigma^2.
    const double q = kPi;
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = -a * dt;
    m.topRightCorner(n, n) = b * q * b.transpose() * dt;
    m.bottomRightCorner(n, n) = a.transpose() * dt;
    const Eigen::MatrixXd e = m.exp();
    GustAxisFilter f;
    f.ad = e.bottomRightCorner(n, n).transpose();
    const Eigen::MatrixXd qd = f.ad * e.topRightCorner(n, n);
    f.noise_chol = psd_factor(qd);
    // Stationary covariance P = sum_k Ad^k Qd Ad^kT by repeated doubling.
    Eigen::MatrixXd ak = f.ad, p = qd;
    for (int i = 0; i < 64; ++i) {
        p = p + ak * p * ak.transpose();
        ak = ak * ak;
    }
    f.stationary_chol = psd_factor(p);
    f.c = c;
    return f;
}

}  // namespace detail

/// Longitudinal filter sigma sqrt(2L/(pi V)) / (1 + (L/V) s).
inline GustAxisFilter longitudinal_gust_filter(double sigma, double scale, double airspeed, double dt) {
    const double t = scale / airspeed;
    const double k = sigma * std::sqrt(2.0 * scale / (kPi * airspeed));
    Eigen::MatrixXd a(1, 1);
    a << -1.0 / t;
    Eigen::VectorXd b(1);
    b << 1.0;
    Eigen::RowVectorXd c(1);
    c << k / t;
    return detail::discretize_gust(a, b, c, dt);
}

/// Lateral/vertical filter sigma sqrt(L/(pi V)) (1 + sqrt3 (L/V) s) / (1 + (L/V) s)^2.
inline GustAxisFilter transverse_gust_filter(double sigma, double scale, double airspeed, double dt) {
    const double t = scale / airspeed;
    const double w = 1.0 / t;
    const double k = sigma * std::sqrt(scale / (kPi * airspeed));
    Eigen::MatrixXd a(2, 2);
    a << 0.0, 1.0, -w * w, -2.0 * w;
    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    Eigen::RowVectorXd c(2);
    c << k * w * w, k * w * w * std::sqrt(3.0) * t;
    return detail::discretize_gust(a, b, c, dt);
}

/// Steady component plus Dryden gust filter states.
class WindModel {
public:
    WindModel() = default;

    WindModel(const DrydenConfig& cfg, double dt, const Vec3& steady = Vec3::Zero())
        : steady_(steady), intensity_(dryden_intensity(cfg)) {
        const double v = cfg.airspeed;
        filters_ = {longitudinal_gust_filter(intensity_.sigma.x(), intensity_.scale.x(), v, dt),
                    transverse_gust_filter(intensity_.sigma.y(), intensity_.scale.y(), v, dt),
                    transverse_gust_filter(intensity_.sigma.z(), intensity_.scale.z(), v, dt)};
        reset_filters();
    }

    const Vec3& steady() const { return steady_; }
    void set_steady(const Vec3& s) { steady_ = s; }
    const DrydenIntensity& intensity() const { return intensity_; }
    bool turbulent() const { return intensity_.sigma.maxCoeff() > 0.0; }

    void reset_filters() {
        states_.clear();
        for (const auto& f : filters_) states_.push_back(Eigen::VectorXd::Zero(f.ad.rows()));
    }

    /// Starts each filter from a draw of its stationary distribution.
    void reset_stationary(Rng& rng) {
        reset_filters();
        if (!turbulent()) return;
        for (std::size_t axis = 0; axis < 3; ++axis) {
            const auto& f = filters_[axis];
            Eigen::VectorXd n(f.ad.rows());
            for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = rng.normal();
            states_[axis] = f.stationary_chol * n;
        }
    }

    /// Advances all filters one step and returns the gust in inertial axes.
    /// Longitudinal axis is aligned with `heading`.
    Vec3 dryden_step(Rng& rng, double heading = 0.0) {
        if (!turbulent()) return Vec3::Zero();
        const Vec3 g = advance(rng);
        last_gust_ = Vec3(std::cos(heading) * g.x() - std::sin(heading) * g.y(),
                          std::sin(heading) * g.x() + std::cos(heading) * g.y(), g.z());
        return last_gust_;
    }

    const Vec3& last_gust() const { return last_gust_; }

    std::vector<double> filter_state() const {
        std::vector<double> out;
        for (const auto& s : states_)
            for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(s[i]);
        out.insert(out.end(), {last_gust_.x(), last_gust_.y(), last_gust_.z()});
        return out;
    }

    void set_filter_state(const std::vector<double>& flat) {
        std::size_t k = 0;
        for (auto& s : states_)
            for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = flat.at(k++);
        last_gust_ = Vec3(flat.at(k), flat.at(k + 1), flat.at(k + 2));
    }

private:
    Vec3 advance(Rng& rng) {
        Vec3 g;
        for (std::size_t axis = 0; axis < 3; ++axis) {
            const auto& f = filters_[axis];
            Eigen::VectorXd n(f.ad.rows());
            for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = rng.normal();
            states_[axis] = f.ad * states_[axis] + f.noise_chol * n;
            g[static_cast<Eigen::Index>(axis)] = f.c.dot(states_[axis]);
        }
        return g;
    }

    Vec3 steady_ = Vec3::Zero();
    DrydenIntensity intensity_;
    std::vector<GustAxisFilter> filters_;
    std::vector<Eigen::VectorXd> states_;
    Vec3 last_gust_ = Vec3::Zero();
};

}  // namespace hyperfc
