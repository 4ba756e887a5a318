// Dense shaped reward, saturation barrier, rate penalty, and the banded variant.
#pragma once

#include <array>
#include <cmath>

#include "hyperfc/dynamics/state.hpp"

namespace hyperfc {

/// Tracking errors in reward order: rates (p, q, r), attitude (phi, theta,
/// course), body-frame position (x, y, z).
using TrackingErrors = Eigen::Matrix<double, 9, 1>;

struct TrackingGains {
    std::array<double, 9> weight = {0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.5, 0.5, 0.5};
    std::array<double, 9> decay = {1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 0.37, 0.37, 0.37};
};

inline double tracking_reward(const TrackingErrors& e, const TrackingGains& g = {}) {
    double r = 0.0;
    for (int i = 0; i < 9; ++i) r += g.weight[i] * std::exp(-g.decay[i] * std::abs(e[i]));
    return r;
}

struct InputRewardGains {
    double barrier = 0.02;  // k3
    double rate = 0.2;      // k4
    double epsilon = 1e-6;
};

inline double margin_barrier(const CommandVector& margin, const InputRewardGains& g = {}) {
    double b = 0.0;
    for (int j = 0; j < 4; ++j) b += std::log(margin[j] + g.epsilon);
    return g.barrier * b;
}

inline double rate_penalty(const CommandVector& cmd, const CommandVector& prev, const InputRewardGains& g = {}) {
    return -g.rate * (cmd - prev).squaredNorm();
}

inline double input_reward(const CommandVector& margin, const CommandVector& cmd, const CommandVector& prev,
                           const InputRewardGains& g = {}) {
    return margin_barrier(margin, g) + rate_penalty(cmd, prev, g);
}

/// Tight/loose tolerances per error group. At a band boundary the looser band applies.
struct BandedTolerances {
    double rate_tight = 0.05, rate_loose = 0.15;         // rad/s
    double attitude_tight = 0.05, attitude_loose = 0.15; // rad
    double position_tight = 1.0, position_loose = 3.0;   // m
};

/// 1 inside the tight band, 0.3 inside the loose band, 0 beyond; summed over the
/// nine error components.
inline double banded_reward(const TrackingErrors& e, const BandedTolerances& t = {}) {
    auto band = [](double err, double tight, double loose) {
        const double a = std::abs(err);
        if (a < tight) return 1.0;
        if (a <= loose) return 0.3;
        return 0.0;
    };
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r += band(e[i], t.rate_tight, t.rate_loose);
    for (int i = 3; i < 6; ++i) r += band(e[i], t.attitude_tight, t.attitude_loose);
    for (int i = 6; i < 9; ++i) r += band(e[i], t.position_tight, t.position_loose);
    return r;
}

enum class RewardMode { Dense, Banded };

struct RewardBreakdown {
    double tracking = 0.0;  // dense tracking term, or the banded sum in banded mode
    double barrier = 0.0;
    double rate = 0.0;
    double total = 0.0;
};

}  // namespace hyperfc
