// Actor-critic parameters for the MLP, FiLM, and LoRA architectures, with a
// batched forward pass and hand-written reverse mode.
#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>
#include <string>
#include <vector>

#include "hyperfc/core/rng.hpp"
#include "hyperfc/nets/arch.hpp"
#include "hyperfc/nets/dense.hpp"
#include "hyperfc/nets/gaussian.hpp"

namespace hyperfc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline const double kInitialLogStd = std::log(0.3);

/// Forward intermediates of one three-layer net (two adapted hidden layers).
struct NetCache {
    Eigen::MatrixXd x[3];     // layer inputs: network input, first and second activations
    Eigen::MatrixXd pre[2];   // hidden pre-activations (LoRA included, FiLM not)
    Eigen::MatrixXd proj[2];  // LoRA V^T x
    Eigen::MatrixXd out;
};

struct HyperCache {
    Eigen::MatrixXd in;
    Eigen::MatrixXd h[2];
    Eigen::MatrixXd out;
};

struct ForwardCache {
    HyperCache hyper;
    NetCache actor;
    NetCache critic;
    Eigen::MatrixXd mean;         // action_dim x B
    Eigen::RowVectorXd value;     // 1 x B
    bool zero_adaptation = false;
};

class Policy {
public:
    Policy() : Policy(ArchSpec{}) {}

    explicit Policy(ArchSpec spec) : spec_(spec) {
        spec_.validate();
        actor_ = add_net("actor", spec_.actor_input(), spec_.action_dim, spec_.hyper());
        if (spec_.hyper()) {
            hyper_w_[0] = layout_.add("hyper.w0", spec_.hyper_hidden, spec_.fail_dim);
            hyper_b_[0] = layout_.add("hyper.b0", spec_.hyper_hidden, 1);
            hyper_w_[1] = layout_.add("hyper.w1", spec_.hyper_hidden, spec_.hyper_hidden);
            hyper_b_[1] = layout_.add("hyper.b1", spec_.hyper_hidden, 1);
            hyper_w_[2] = layout_.add("hyper.w2", spec_.hyper_out(), spec_.hyper_hidden);
            hyper_b_[2] = layout_.add("hyper.b2", spec_.hyper_out(), 1);
        }
        critic_ = add_net("critic", spec_.critic_input(), 1, spec_.hyper_critic);
        log_std_ = layout_.add("log_std", spec_.action_dim, 1);
        params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.total()));
        params_.segment(offset(log_std_), spec_.action_dim).setConstant(kInitialLogStd);
    }

    const ArchSpec& spec() const { return spec_; }
    const ParamLayout& layout() const { return layout_; }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }
    std::size_t param_count() const { return layout_.total(); }

    Eigen::Map<RowMatrix> tensor(int id) {
        const auto& t = layout_[id];
        return {params_.data() + t.offset, t.rows, t.cols};
    }
    Eigen::Map<const RowMatrix> tensor(int id) const {
        const auto& t = layout_[id];
        return {params_.data() + t.offset, t.rows, t.cols};
    }
    Eigen::Map<RowMatrix> tensor(const std::string& name) { return tensor(find(name)); }
    Eigen::Map<const RowMatrix> tensor(const std::string& name) const { return tensor(find(name)); }

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < layout_.tensors().size(); ++i)
            if (layout_.tensors()[i].name == name) return static_cast<int>(i);
        throw ShapeError("no tensor named '" + name + "'");
    }

    Eigen::VectorXd log_std() const { return params_.segment(offset(log_std_), spec_.action_dim); }

    /// Orthogonal hidden layers (gain sqrt 2), actor output gain 0.01, critic
    /// output gain 1, zero biases. The hypernetwork output layer starts at zero
    /// (FiLM) or at r = 1 with U = 0 (LoRA), so the initial policy is unadapted.
    void initialize(Rng& rng) {
        params_.setZero();
        const double g = std::sqrt(2.0);
        init_net(actor_, g, 0.01, rng);
        if (spec_.hyper()) {
            orthogonal(tensor(hyper_w_[0]), g, rng);
            orthogonal(tensor(hyper_w_[1]), g, rng);
            if (spec_.kind == ArchKind::LoRA) tensor(hyper_b_[2]).setOnes();
        }
        init_net(critic_, g, 1.0, rng);
        params_.segment(offset(log_std_), spec_.action_dim).setConstant(kInitialLogStd);
    }

    /// Columns are samples. `state` is state_dim x B, `lambda` is fail_dim x B.
    /// With zero_adaptation the hypernetwork output is replaced by zeros.
    ForwardCache forward(const Eigen::MatrixXd& state, const Eigen::MatrixXd& lambda,
                         bool zero_adaptation = false) const {
        if (state.rows() != spec_.state_dim || lambda.rows() != spec_.fail_dim || state.cols() != lambda.cols())
            throw ShapeError("policy input has wrong shape");
        ForwardCache c;
        c.zero_adaptation = zero_adaptation;
        Eigen::MatrixXd joint;
        if (!spec_.hyper() || !spec_.hyper_critic) {
            joint.resize(spec_.state_dim + spec_.fail_dim, state.cols());
            joint << state, lambda;
        }
        const Eigen::MatrixXd* adapt = nullptr;
        if (spec_.hyper()) {
            c.hyper.in = lambda;
            c.hyper.h[0] = affine(tensor(hyper_w_[0]), vec(hyper_b_[0]), lambda).array().tanh().matrix();
            c.hyper.h[1] = affine(tensor(hyper_w_[1]), vec(hyper_b_[1]), c.hyper.h[0]).array().tanh().matrix();
            c.hyper.out = affine(tensor(hyper_w_[2]), vec(hyper_b_[2]), c.hyper.h[1]);
            if (zero_adaptation) c.hyper.out.setZero();
            adapt = &c.hyper.out;
        }
        net_forward(actor_, spec_.hyper() ? state : joint, adapt, 0, c.actor);
        net_forward(critic_, spec_.hyper_critic ? state : joint, spec_.hyper_critic ? adapt : nullptr,
                    spec_.actor_adapt_dim(), c.critic);
        c.mean = c.actor.out;
        c.value = c.critic.out.row(0);
        return c;
    }

    struct Output {
        Eigen::VectorXd mean;
        double value = 0.0;
    };

    Output evaluate(const Eigen::VectorXd& state, const Eigen::VectorXd& lambda) const {
        const ForwardCache c = forward(Eigen::MatrixXd(state), Eigen::MatrixXd(lambda));
        return {c.mean.col(0), c.value[0]};
    }

    /// Accumulates dL/dparams into grad given upstream gradients of the batch
    /// outputs and of log_std.
    void backward(const ForwardCache& c, const Eigen::MatrixXd& dmean, const Eigen::RowVectorXd& dvalue,
                  const Eigen::VectorXd& dlog_std, Eigen::VectorXd& grad) const {
        if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
        Eigen::MatrixXd dadapt;
        if (spec_.hyper()) dadapt = Eigen::MatrixXd::Zero(spec_.hyper_out(), c.mean.cols());
        net_backward(actor_, c.actor, c.hyper.out, 0, dmean, spec_.hyper() ? &dadapt : nullptr, grad);
        net_backward(critic_, c.critic, c.hyper.out, spec_.actor_adapt_dim(), Eigen::MatrixXd(dvalue),
                     spec_.hyper_critic ? &dadapt : nullptr, grad);
        grad.segment(offset(log_std_), spec_.action_dim) += dlog_std;
        if (spec_.hyper() && !c.zero_adaptation) hyper_backward(c, dadapt, grad);
    }

    /// Main actor net with its own weights only (LoRA update and FiLM excluded).
    DenseNet actor_main_net() const { return extract(actor_); }
    DenseNet critic_main_net() const { return extract(critic_); }

    DenseNet hypernet() const {
        DenseNet n;
        if (!spec_.hyper()) return n;
        for (int i = 0; i < 3; ++i) n.layers.push_back({tensor(hyper_w_[i]), vec(hyper_b_[i])});
        return n;
    }

    /// 2 x multiply-accumulates for one action: actor path plus the hypernetwork
    /// rows feeding the actor. LoRA updates are evaluated in factored form.
    long long flop_count() const {
        long long mac = 0;
        const long long h = spec_.hidden;
        const long long in = spec_.actor_input();
        mac += in * h + h * h + h * spec_.action_dim;
        if (spec_.kind == ArchKind::LoRA) mac += static_cast<long long>(spec_.rank) * (in + 3 * h);
        if (spec_.hyper()) {
            const long long hh = spec_.hyper_hidden;
            mac += spec_.fail_dim * hh + hh * hh + hh * spec_.actor_adapt_dim();
        }
        return 2 * mac;
    }

private:
    struct NetIds {
        int w[3] = {-1, -1, -1};
        int b[3] = {-1, -1, -1};
        int u[2] = {-1, -1};
        int v[2] = {-1, -1};
        bool adapted = false;
    };

    NetIds add_net(const std::string& name, int in, int out, bool adapted) {
        NetIds n;
        n.adapted = adapted;
        const int h = spec_.hidden;
        const int dims[4] = {in, h, h, out};
        for (int l = 0; l < 3; ++l) {
            n.w[l] = layout_.add(name + ".w" + std::to_string(l), dims[l + 1], dims[l]);
            n.b[l] = layout_.add(name + ".b" + std::to_string(l), dims[l + 1], 1);
            if (adapted && spec_.kind == ArchKind::LoRA && l < 2) {
                n.u[l] = layout_.add(name + ".u" + std::to_string(l), dims[l + 1], spec_.rank);
                n.v[l] = layout_.add(name + ".v" + std::to_string(l), dims[l], spec_.rank);
            }
        }
        return n;
    }

    Eigen::Index offset(int id) const { return static_cast<Eigen::Index>(layout_[id].offset); }

    Eigen::Map<const Eigen::VectorXd> vec(int id) const {
        return {params_.data() + layout_[id].offset, layout_[id].rows * layout_[id].cols};
    }

    static void orthogonal(Eigen::Map<RowMatrix> w, double gain, Rng& rng) {
        const Eigen::Index r = w.rows(), c = w.cols();
        const Eigen::Index n = std::max(r, c), k = std::min(r, c);
        Eigen::MatrixXd a(n, k);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
        const Eigen::VectorXd d = qr.matrixQR().diagonal();
        for (Eigen::Index j = 0; j < k; ++j)
            if (d[j] < 0.0) q.col(j) *= -1.0;
        if (r >= c) w = gain * q;
        else w = gain * q.transpose();
    }

    void init_net(const NetIds& n, double hidden_gain, double out_gain, Rng& rng) {
        orthogonal(tensor(n.w[0]), hidden_gain, rng);
        orthogonal(tensor(n.w[1]), hidden_gain, rng);
        orthogonal(tensor(n.w[2]), out_gain, rng);
        for (int l = 0; l < 2; ++l) {
            if (n.v[l] < 0) continue;
            auto v = tensor(n.v[l]);
            const double sd = 1.0 / std::sqrt(static_cast<double>(v.rows()));
            for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = sd * rng.normal();
        }
    }

    DenseNet extract(const NetIds& n) const {
        DenseNet d;
        for (int l = 0; l < 3; ++l) d.layers.push_back({tensor(n.w[l]), vec(n.b[l])});
        return d;
    }

    void net_forward(const NetIds& n, const Eigen::MatrixXd& input, const Eigen::MatrixXd* adapt, int row0,
                     NetCache& c) const {
        const int per = spec_.adapt_per_layer();
        const int hdim = spec_.hidden;
        c.x[0] = input;
        for (int l = 0; l < 2; ++l) {
            Eigen::MatrixXd pre = affine(tensor(n.w[l]), vec(n.b[l]), c.x[l]);
            Eigen::MatrixXd mod;
            if (adapt && spec_.kind == ArchKind::LoRA) {
                c.proj[l] = tensor(n.v[l]).transpose() * c.x[l];
                const auto r = adapt->middleRows(row0 + l * per, per);
                pre += (tensor(n.u[l]) * r.cwiseProduct(c.proj[l])) / static_cast<double>(spec_.rank);
            }
            if (adapt && spec_.kind == ArchKind::FiLM) {
                const auto s = adapt->middleRows(row0 + l * per, hdim);
                const auto t = adapt->middleRows(row0 + l * per + hdim, hdim);
                mod = ((1.0 + kFilmScale * s.array()) * pre.array() + kFilmScale * t.array()).matrix();
            } else {
                mod = pre;
            }
            c.pre[l] = std::move(pre);
            c.x[l + 1] = mod.array().tanh().matrix();
        }
        c.out = affine(tensor(n.w[2]), vec(n.b[2]), c.x[2]);
    }

    void add_grad(Eigen::VectorXd& grad, int id, const Eigen::MatrixXd& g) const {
        const auto& t = layout_[id];
        Eigen::Map<RowMatrix>(grad.data() + t.offset, t.rows, t.cols) += g;
    }

    void net_backward(const NetIds& n, const NetCache& c, const Eigen::MatrixXd& adapt_out, int row0,
                      const Eigen::MatrixXd& dout, Eigen::MatrixXd* dadapt, Eigen::VectorXd& grad) const {
        const int per = spec_.adapt_per_layer();
        const int hdim = spec_.hidden;
        const bool adapted = dadapt != nullptr;
        add_grad(grad, n.w[2], dout * c.x[2].transpose());
        add_grad(grad, n.b[2], dout.rowwise().sum());
        Eigen::MatrixXd da = tensor(n.w[2]).transpose() * dout;
        for (int l = 1; l >= 0; --l) {
            const Eigen::MatrixXd dmod = (da.array() * (1.0 - c.x[l + 1].array().square())).matrix();
            Eigen::MatrixXd dpre;
            if (adapted && spec_.kind == ArchKind::FiLM) {
                const auto s = adapt_out.middleRows(row0 + l * per, hdim);
                dadapt->middleRows(row0 + l * per, hdim) += kFilmScale * dmod.cwiseProduct(c.pre[l]);
                dadapt->middleRows(row0 + l * per + hdim, hdim) += kFilmScale * dmod;
                dpre = ((1.0 + kFilmScale * s.array()) * dmod.array()).matrix();
            } else {
                dpre = dmod;
            }
            add_grad(grad, n.w[l], dpre * c.x[l].transpose());
            add_grad(grad, n.b[l], dpre.rowwise().sum());
            if (l == 0 && !(adapted && spec_.kind == ArchKind::LoRA)) break;
            Eigen::MatrixXd dx = tensor(n.w[l]).transpose() * dpre;
            if (adapted && spec_.kind == ArchKind::LoRA) {
                const double k = 1.0 / static_cast<double>(spec_.rank);
                const auto r = adapt_out.middleRows(row0 + l * per, per);
                const Eigen::MatrixXd q = r.cwiseProduct(c.proj[l]);
                add_grad(grad, n.u[l], k * dpre * q.transpose());
                const Eigen::MatrixXd dq = k * (tensor(n.u[l]).transpose() * dpre);
                dadapt->middleRows(row0 + l * per, per) += dq.cwiseProduct(c.proj[l]);
                const Eigen::MatrixXd dproj = dq.cwiseProduct(r);
                add_grad(grad, n.v[l], c.x[l] * dproj.transpose());
                if (l > 0) dx += tensor(n.v[l]) * dproj;
            }
            da = std::move(dx);
        }
    }

    void hyper_backward(const ForwardCache& c, const Eigen::MatrixXd& dout, Eigen::VectorXd& grad) const {
        add_grad(grad, hyper_w_[2], dout * c.hyper.h[1].transpose());
        add_grad(grad, hyper_b_[2], dout.rowwise().sum());
        Eigen::MatrixXd dh = tensor(hyper_w_[2]).transpose() * dout;
        Eigen::MatrixXd dz = (dh.array() * (1.0 - c.hyper.h[1].array().square())).matrix();
        add_grad(grad, hyper_w_[1], dz * c.hyper.h[0].transpose());
        add_grad(grad, hyper_b_[1], dz.rowwise().sum());
        dh = tensor(hyper_w_[1]).transpose() * dz;
        dz = (dh.array() * (1.0 - c.hyper.h[0].array().square())).matrix();
        add_grad(grad, hyper_w_[0], dz * c.hyper.in.transpose());
        add_grad(grad, hyper_b_[0], dz.rowwise().sum());
    }

    ArchSpec spec_;
    ParamLayout layout_;
    NetIds actor_, critic_;
    int hyper_w_[3] = {-1, -1, -1};
    int hyper_b_[3] = {-1, -1, -1};
    int log_std_ = -1;
    Eigen::VectorXd params_;
};

}  // namespace hyperfc
