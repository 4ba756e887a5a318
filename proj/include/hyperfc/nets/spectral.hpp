// Power-iteration spectral norms and the layer-product Lipschitz bound.
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hyperfc/core/rng.hpp"
#include "hyperfc/nets/dense.hpp"

namespace hyperfc {

struct PowerIterationOptions {
    int min_iterations = 50;
    int max_iterations = 20000;
    double tolerance = 1e-14;  // relative change of the estimate between iterations
    std::uint64_t seed = 12345;
};

/// Largest singular value of w by power iteration on w^T w.
inline double spectral_norm(const Eigen::MatrixXd& w, const PowerIterationOptions& opt = {}) {
    if (w.size() == 0 || w.isZero(0.0)) return 0.0;
    Rng rng(opt.seed);
    Eigen::VectorXd v(w.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd u = w * v;
        Eigen::VectorXd next = w.transpose() * u;
        const double n = next.norm();
        if (n == 0.0) return 0.0;
        next /= n;
        const double est = (w * next).norm();
        const bool converged = it + 1 >= opt.min_iterations && std::abs(est - sigma) <= opt.tolerance * est;
        sigma = est;
        v = next;
        if (converged) break;
    }
    return sigma;
}

/// Product of layer spectral norms; valid because tanh is 1-Lipschitz.
inline double lipschitz_bound(const DenseNet& net, const PowerIterationOptions& opt = {}) {
    double bound = 1.0;
    for (const auto& layer : net.layers) bound *= spectral_norm(layer.w, opt);
    return bound;
}

}  // namespace hyperfc
