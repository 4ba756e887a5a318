// Adam optimizer over a flat parameter vector.
#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace hyperfc {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index n, AdamConfig cfg = {}) : cfg_(cfg), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
        ++t_;
        m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
        v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
    }

    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    const Eigen::VectorXd& first_moment() const { return m_; }
    const Eigen::VectorXd& second_moment() const { return v_; }
    long long steps() const { return t_; }

    void restore(Eigen::VectorXd m, Eigen::VectorXd v, long long t) {
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

private:
    AdamConfig cfg_;
    Eigen::VectorXd m_, v_;
    long long t_ = 0;
};

}  // namespace hyperfc
