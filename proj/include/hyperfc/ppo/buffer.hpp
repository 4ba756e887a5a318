// Rollout storage and generalized advantage estimation.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hyperfc/env/observation.hpp"

namespace hyperfc {

/// Column j holds step t of environment e with j = e * n_steps + t.
struct RolloutBuffer {
    int n_env = 0;
    int n_steps = 0;
    Eigen::MatrixXd states;    // state_dim x N
    Eigen::MatrixXd lambdas;   // fail_dim x N
    Eigen::MatrixXd actions;   // action_dim x N
    Eigen::VectorXd log_probs;
    Eigen::VectorXd rewards;
    Eigen::VectorXd values;
    Eigen::VectorXd next_values;  // V of the following state; bootstrap at truncation, 0 after a failure
    Eigen::VectorXd dones;        // 1 where the episode ended on this step
    std::vector<int> causes;      // Termination as int
    Eigen::VectorXd advantages;
    Eigen::VectorXd returns;

    RolloutBuffer() = default;
    RolloutBuffer(int envs, int steps, int state_dim = kStateObsDim, int fail_dim = kFailureDim,
                  int action_dim = kActionDim)
        : n_env(envs), n_steps(steps) {
        const Eigen::Index n = static_cast<Eigen::Index>(envs) * steps;
        states = Eigen::MatrixXd::Zero(state_dim, n);
        lambdas = Eigen::MatrixXd::Zero(fail_dim, n);
        actions = Eigen::MatrixXd::Zero(action_dim, n);
        log_probs = rewards = values = next_values = dones = advantages = returns = Eigen::VectorXd::Zero(n);
        causes.assign(static_cast<std::size_t>(n), 0);
    }

    Eigen::Index size() const { return rewards.size(); }
    Eigen::Index index(int env, int t) const { return static_cast<Eigen::Index>(env) * n_steps + t; }
};

/// A_t = d_t + gamma * lambda * (1 - done_t) * A_{t+1}, d_t = r_t + gamma * next_value_t - V_t,
/// evaluated independently per environment row.
inline void compute_gae(RolloutBuffer& buf, double gamma, double lambda) {
    for (int e = 0; e < buf.n_env; ++e) {
        double next_adv = 0.0;
        for (int t = buf.n_steps - 1; t >= 0; --t) {
            const Eigen::Index i = buf.index(e, t);
            const double delta = buf.rewards[i] + gamma * buf.next_values[i] - buf.values[i];
            const double carry = (t == buf.n_steps - 1) ? 0.0 : (1.0 - buf.dones[i]) * next_adv;
            buf.advantages[i] = delta + gamma * lambda * carry;
            next_adv = buf.advantages[i];
        }
    }
    buf.returns = buf.advantages + buf.values;
}

/// Zero mean, unit (population) standard deviation.
inline Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& a) {
    const double mean = a.mean();
    const Eigen::VectorXd c = a.array() - mean;
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(a.size()));
    return c / (sd + 1e-12);
}

}  // namespace hyperfc
