// Diagonal Gaussian action head.
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hyperfc/core/math.hpp"
#include "hyperfc/core/rng.hpp"

namespace hyperfc {

inline constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)

inline double gaussian_log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& log_std) {
    const Eigen::ArrayXd z = (action - mean).array() / log_std.array().exp();
    return (-0.5 * z.square() - log_std.array() - 0.5 * kLogTwoPi).sum();
}

inline double gaussian_entropy(const Eigen::VectorXd& log_std) {
    return (log_std.array() + 0.5 + 0.5 * kLogTwoPi).sum();
}

struct SampledAction {
    Eigen::VectorXd action;
    double log_prob = 0.0;
};

/// Draws mean + std * N(0, I); with deterministic = true returns the mean.
inline SampledAction sample_action(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, Rng& rng,
                                   bool deterministic = false) {
    SampledAction s;
    s.action = mean;
    if (!deterministic)
        for (Eigen::Index i = 0; i < mean.size(); ++i) s.action[i] += std::exp(log_std[i]) * rng.normal();
    s.log_prob = gaussian_log_prob(s.action, mean, log_std);
    return s;
}

}  // namespace hyperfc
