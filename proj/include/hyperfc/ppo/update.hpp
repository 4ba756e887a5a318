// Clipped-surrogate PPO loss, its gradient, and the epoch/minibatch update loop.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hyperfc/core/error.hpp"
#include "hyperfc/core/rng.hpp"
#include "hyperfc/nets/policy.hpp"
#include "hyperfc/ppo/adam.hpp"
#include "hyperfc/ppo/buffer.hpp"

namespace hyperfc {

struct PPOConfig {
    double lr = 3e-4;
    double clip = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    int epochs = 10;
    int minibatch = 64;
    double entropy_coef = 0.0;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    int n_env = 16;
    int n_steps = 512;
    int iterations = 100;
    int workers = 1;
    int checkpoint_interval = 10;  // 0 = final only
    int eval_interval = 0;         // 0 = never
    int eval_episodes = 4;

    void validate() const {
        if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("clip ratio must be in (0, 1)");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("discount must be in (0, 1]");
        if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw ConfigError("GAE lambda must be in (0, 1]");
        if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
        if (epochs <= 0 || minibatch <= 0 || n_env <= 0 || n_steps <= 0 || iterations < 0 || workers <= 0)
            throw ConfigError("PPO counts must be positive");
        if (!(max_grad_norm > 0.0)) throw ConfigError("max gradient norm must be positive");
        if (checkpoint_interval < 0 || eval_interval < 0 || eval_episodes < 0)
            throw ConfigError("intervals must be non-negative");
    }
};

struct LossTerms {
    double policy = 0.0;   // -mean clipped surrogate
    double value = 0.0;    // mean squared return error
    double entropy = 0.0;
    double total = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
};

/// Loss on the columns `idx` of the buffer; accumulates its gradient into grad when given.
inline LossTerms ppo_loss(const Policy& policy, const RolloutBuffer& buf, const std::vector<Eigen::Index>& idx,
                          const Eigen::VectorXd& adv, const PPOConfig& cfg, Eigen::VectorXd* grad) {
    const auto b = static_cast<Eigen::Index>(idx.size());
    if (b == 0) throw ProtocolError("empty minibatch");
    const ArchSpec& spec = policy.spec();
    Eigen::MatrixXd s(spec.state_dim, b), l(spec.fail_dim, b), a(spec.action_dim, b);
    Eigen::VectorXd old_lp(b), ad(b), ret(b);
    for (Eigen::Index j = 0; j < b; ++j) {
        const Eigen::Index i = idx[static_cast<std::size_t>(j)];
        s.col(j) = buf.states.col(i);
        l.col(j) = buf.lambdas.col(i);
        a.col(j) = buf.actions.col(i);
        old_lp[j] = buf.log_probs[i];
        ad[j] = adv[i];
        ret[j] = buf.returns[i];
    }
    const ForwardCache c = policy.forward(s, l);
    const Eigen::VectorXd log_std = policy.log_std();
    const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();

    const double inv_b = 1.0 / static_cast<double>(b);
    LossTerms out;
    Eigen::MatrixXd dmean = Eigen::MatrixXd::Zero(spec.action_dim, b);
    Eigen::RowVectorXd dvalue(b);
    Eigen::VectorXd dlog_std = Eigen::VectorXd::Zero(spec.action_dim);
    for (Eigen::Index j = 0; j < b; ++j) {
        const Eigen::VectorXd diff = a.col(j) - c.mean.col(j);
        const double lp = gaussian_log_prob(a.col(j), c.mean.col(j), log_std);
        const double log_ratio = lp - old_lp[j];
        const double ratio = std::exp(log_ratio);
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const double surr = std::min(ratio * ad[j], clipped * ad[j]);
        out.policy -= surr * inv_b;
        const bool clip_active = (ad[j] >= 0.0 && ratio > 1.0 + cfg.clip) || (ad[j] < 0.0 && ratio < 1.0 - cfg.clip);
        if (std::abs(ratio - 1.0) > cfg.clip) out.clip_fraction += inv_b;
        out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
        // d(-surr)/d(logp) = -A * ratio where the unclipped branch is selected.
        const double dlp = clip_active ? 0.0 : -ad[j] * ratio * inv_b;
        dmean.col(j) = dlp * (diff.array() * inv_var).matrix();
        dlog_std.array() += dlp * ((diff.array().square() * inv_var) - 1.0);

        const double err = c.value[j] - ret[j];
        out.value += err * err * inv_b;
        dvalue[j] = cfg.value_coef * 2.0 * err * inv_b;
    }
    out.entropy = gaussian_entropy(log_std);
    dlog_std.array() -= cfg.entropy_coef;
    out.total = out.policy + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
    if (grad) policy.backward(c, dmean, dvalue, dlog_std, *grad);
    return out;
}

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    double grad_norm = 0.0;  // before clipping
    int minibatches = 0;
};

/// Fisher-Yates driven by the project RNG so permutations are identical across platforms.
inline std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<int>(i)));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

/// Epochs of shuffled minibatch steps. On a non-finite loss or gradient the
/// parameters and optimizer are restored to their pre-update values.
inline UpdateStats ppo_update(Policy& policy, Adam& opt, const RolloutBuffer& buf, const PPOConfig& cfg, Rng& rng) {
    const Eigen::VectorXd adv = normalize_advantages(buf.advantages);
    const Eigen::VectorXd saved_params = policy.params();
    const Adam saved_opt = opt;
    UpdateStats st;
    const Eigen::Index n = buf.size();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto perm = shuffled_indices(n, rng);
        for (Eigen::Index start = 0; start < n; start += cfg.minibatch) {
            const Eigen::Index end = std::min(n, start + cfg.minibatch);
            const std::vector<Eigen::Index> idx(perm.begin() + start, perm.begin() + end);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.params().size());
            const LossTerms lt = ppo_loss(policy, buf, idx, adv, cfg, &grad);
            const double gn = grad.norm();
            if (!std::isfinite(lt.total) || !std::isfinite(gn)) {
                policy.params() = saved_params;
                opt = saved_opt;
                throw NumericError("non-finite PPO loss at epoch " + std::to_string(epoch) + ", minibatch starting " +
                                   std::to_string(start) + " (policy " + std::to_string(lt.policy) + ", value " +
                                   std::to_string(lt.value) + ")");
            }
            if (gn > cfg.max_grad_norm) grad *= cfg.max_grad_norm / gn;
            opt.step(policy.params(), grad);
            st.policy_loss += lt.policy;
            st.value_loss += lt.value;
            st.entropy += lt.entropy;
            st.approx_kl += lt.approx_kl;
            st.clip_fraction += lt.clip_fraction;
            st.grad_norm += gn;
            ++st.minibatches;
        }
    }
    if (st.minibatches > 0) {
        const double k = 1.0 / st.minibatches;
        st.policy_loss *= k;
        st.value_loss *= k;
        st.entropy *= k;
        st.approx_kl *= k;
        st.clip_fraction *= k;
        st.grad_norm *= k;
    }
    return st;
}

}  // namespace hyperfc
