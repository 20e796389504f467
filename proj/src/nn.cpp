#include "tsg/nn.hpp"

#include <cmath>

namespace tsg::nn {

void glorot_uniform(Mat& w, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
}

void zero_grads(const std::vector<Param*>& params) {
    for (auto* p : params) p->grad.setZero();
}

double global_grad_norm(const std::vector<Param*>& params) {
    double s = 0.0;
    for (const auto* p : params) s += p->grad.squaredNorm();
    return std::sqrt(s);
}

double clip_grad_norm(const std::vector<Param*>& params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto* p : params) p->grad *= scale;
    }
    return norm;
}

// --- Linear -----------------------------------------------------------------

Linear::Linear(const std::string& name, int in, int out, Rng& rng)
    : weight(name + ".weight", out, in), bias(name + ".bias", 1, out) {
    glorot_uniform(weight.value, rng);
}

Mat Linear::forward(const Mat& x) const {
    Mat y = x * weight.value.transpose();
    y.rowwise() += bias.value.row(0);
    return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
    weight.grad.noalias() += dy.transpose() * x;
    bias.grad += dy.colwise().sum();
    return dy * weight.value;
}

void Linear::collect(std::vector<Param*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
}

// --- PReLU ------------------------------------------------------------------

PReLU::PReLU(const std::string& name, double init) : slope(name + ".slope", 1, 1) { slope.value(0, 0) = init; }

Mat PReLU::forward(const Mat& x) const {
    const double a = slope.value(0, 0);
    return x.unaryExpr([a](double v) { return v > 0.0 ? v : a * v; });
}

Mat PReLU::backward(const Mat& x, const Mat& dy) {
    const double a = slope.value(0, 0);
    Mat dx(x.rows(), x.cols());
    double da = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        const double g = dy.data()[i];
        if (v > 0.0) {
            dx.data()[i] = g;
        } else {
            dx.data()[i] = a * g;
            da += g * v;
        }
    }
    slope.grad(0, 0) += da;
    return dx;
}

void PReLU::collect(std::vector<Param*>& out) { out.push_back(&slope); }

// --- Mlp --------------------------------------------------------------------

Mlp::Mlp(const std::string& name, int in, int hidden, int out, Rng& rng)
    : first(name + ".0", in, hidden, rng), act(name + ".act"), second(name + ".1", hidden, out, rng) {}

Mat Mlp::forward(const Mat& x, Tape* tape) const {
    Mat h = first.forward(x);
    Mat a = act.forward(h);
    Mat y = second.forward(a);
    if (tape != nullptr) {
        tape->x = x;
        tape->hidden = std::move(h);
        tape->activated = std::move(a);
    }
    return y;
}

Mat Mlp::backward(const Tape& tape, const Mat& dy) {
    Mat da = second.backward(tape.activated, dy);
    Mat dh = act.backward(tape.hidden, da);
    return first.backward(tape.x, dh);
}

void Mlp::collect(std::vector<Param*>& out) {
    first.collect(out);
    act.collect(out);
    second.collect(out);
}

// --- BatchNorm --------------------------------------------------------------

BatchNorm::BatchNorm(const std::string& name, int dim, double mom, double epsilon)
    : gamma(name + ".gamma", 1, dim),
      beta(name + ".beta", 1, dim),
      running_mean(name + ".running_mean", 1, dim),
      running_var(name + ".running_var", 1, dim),
      momentum(mom),
      eps(epsilon) {
    gamma.value.setOnes();
    running_var.value.setOnes();
}

Mat BatchNorm::forward(const Mat& x, BnMode mode, Tape* tape) const {
    const Eigen::Index n = x.rows();
    RowVec mean;
    RowVec var;
    if (mode == BnMode::train && n > 0) {
        mean = x.colwise().mean();
        var = (x.rowwise() - mean).array().square().colwise().mean().matrix();
    } else {
        mean = running_mean.value.row(0);
        var = running_var.value.row(0);
    }
    RowVec inv_std = (var.array() + eps).rsqrt().matrix();
    Mat xhat = (x.rowwise() - mean).array().rowwise() * inv_std.array();
    Mat y = xhat.array().rowwise() * gamma.value.row(0).array();
    y.rowwise() += beta.value.row(0);
    if (tape != nullptr) {
        tape->mode = mode;
        tape->rows = n;
        tape->inv_std = inv_std;
        tape->batch_mean = mean;
        tape->batch_var = var;
        tape->xhat = std::move(xhat);
    }
    return y;
}

Mat BatchNorm::backward(const Tape& tape, const Mat& dy) {
    const Eigen::Index n = tape.rows;
    if (n == 0) return Mat::Zero(0, dy.cols());
    gamma.grad += (dy.array() * tape.xhat.array()).colwise().sum().matrix();
    beta.grad += dy.colwise().sum();
    Mat dxhat = dy.array().rowwise() * gamma.value.row(0).array();
    if (tape.mode == BnMode::eval) {
        return dxhat.array().rowwise() * tape.inv_std.array();
    }
    const RowVec sum_dxhat = dxhat.colwise().sum();
    const RowVec sum_dxhat_xhat = (dxhat.array() * tape.xhat.array()).colwise().sum().matrix();
    const double inv_n = 1.0 / static_cast<double>(n);
    Mat dx = (dxhat * static_cast<double>(n)).rowwise() - sum_dxhat;
    dx -= (tape.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    dx = (dx.array().rowwise() * (tape.inv_std.array() * inv_n)).matrix();
    return dx;
}

void BatchNorm::update_running(const Tape& tape) {
    if (tape.mode != BnMode::train || tape.rows < 2) return;
    const double n = static_cast<double>(tape.rows);
    running_mean.value = (1.0 - momentum) * running_mean.value + momentum * tape.batch_mean;
    running_var.value = (1.0 - momentum) * running_var.value + momentum * (tape.batch_var * (n / (n - 1.0)));
}

void BatchNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

void BatchNorm::collect_buffers(std::vector<Param*>& out) {
    out.push_back(&running_mean);
    out.push_back(&running_var);
}

Mat relu(const Mat& x) { return x.cwiseMax(0.0); }

Mat relu_backward(const Mat& y, const Mat& dy) { return (y.array() > 0.0).select(dy, 0.0); }

// --- AdamW ------------------------------------------------------------------

void AdamW::step(const std::vector<Param*>& params) {
    if (m_.empty()) {
        for (const auto* p : params) {
            m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
            v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = *params[i];
        p.value *= (1.0 - lr_ * wd_);
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
        p.value.array() -= lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
}

}  // namespace tsg::nn
