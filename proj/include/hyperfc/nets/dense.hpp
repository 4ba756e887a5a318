// Dense tanh networks and the two adaptation primitives.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hyperfc/core/error.hpp"

namespace hyperfc {

/// W X + b applied column-wise. Every forward path goes through here so that
/// adapted and unadapted evaluations share the same floating-point order.
inline Eigen::MatrixXd affine(const Eigen::Ref<const Eigen::MatrixXd>& w, const Eigen::Ref<const Eigen::VectorXd>& b,
                              const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = w * x;
    out.colwise() += b;
    return out;
}

struct DenseLayer {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
};

/// tanh hidden layers, linear output.
struct DenseNet {
    std::vector<DenseLayer> layers;

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd h = x;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            h = affine(layers[i].w, layers[i].b, h);
            if (i + 1 < layers.size()) h = h.array().tanh().matrix();
        }
        return h;
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        const Eigen::MatrixXd out = forward(Eigen::MatrixXd(x));
        return out.col(0);
    }

    int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols()); }
    int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().w.rows()); }
};

inline constexpr double kFilmScale = 0.1;

/// (1 + 0.1 scale_raw) * pre + 0.1 shift_raw, element-wise. Activation is the caller's.
inline Eigen::VectorXd film_modulate(const Eigen::VectorXd& pre, const Eigen::VectorXd& scale_raw,
                                     const Eigen::VectorXd& shift_raw) {
    if (pre.size() != scale_raw.size() || pre.size() != shift_raw.size())
        throw ShapeError("FiLM vectors must have equal length");
    return ((1.0 + kFilmScale * scale_raw.array()) * pre.array() + kFilmScale * shift_raw.array()).matrix();
}

/// W h + (1/n_r) U (r .* (V^T h)) without forming the dense update.
inline Eigen::VectorXd lora_apply(const Eigen::MatrixXd& w, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                                  const Eigen::VectorXd& r, int n_r, const Eigen::VectorXd& h) {
    if (n_r <= 0) throw ShapeError("LoRA rank must be positive");
    if (w.cols() != h.size() || v.rows() != h.size() || u.rows() != w.rows() || u.cols() != n_r ||
        v.cols() != n_r || r.size() != n_r)
        throw ShapeError("inconsistent LoRA shapes");
    const Eigen::VectorXd proj = v.transpose() * h;
    return w * h + (u * r.cwiseProduct(proj)) / static_cast<double>(n_r);
}

/// Per-layer split of a hypernetwork output.
struct AdaptationParams {
    std::vector<Eigen::VectorXd> scale;  // FiLM
    std::vector<Eigen::VectorXd> shift;  // FiLM
    std::vector<Eigen::VectorXd> rank;   // LoRA
};

/// Runs the hypernetwork on lambda and splits the output into `layers` chunks:
/// FiLM chunks are [scale | shift] of `width` each, LoRA chunks are r of `width`.
inline AdaptationParams hypernet_forward(const DenseNet& hnet, const Eigen::VectorXd& lambda, bool film, int layers,
                                         int width) {
    const Eigen::VectorXd out = hnet.forward(lambda);
    const int per = film ? 2 * width : width;
    if (out.size() < static_cast<Eigen::Index>(per) * layers) throw ShapeError("hypernetwork output too narrow");
    AdaptationParams a;
    for (int l = 0; l < layers; ++l) {
        if (film) {
            a.scale.push_back(out.segment(l * per, width));
            a.shift.push_back(out.segment(l * per + width, width));
        } else {
            a.rank.push_back(out.segment(l * per, width));
        }
    }
    return a;
}

}  // namespace hyperfc
