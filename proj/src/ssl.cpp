#include "tsg/ssl.hpp"

#include <cmath>

namespace tsg {

namespace {

struct Normalized {
    Mat unit;
    Vec norm;
};

Normalized normalize(const Mat& z) {
    Normalized n{Mat(z.rows(), z.cols()), Vec(z.rows())};
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double len = z.row(i).norm();
        if (!(len > 0.0)) throw Error("degenerate_embedding", "zero-norm embedding in loss (collapse?)");
        n.norm(i) = len;
        n.unit.row(i) = z.row(i) / len;
    }
    return n;
}

// Gradient through x -> x / |x| given d(unit).
Mat normalize_backward(const Normalized& n, const Mat& d_unit) {
    Mat d(d_unit.rows(), d_unit.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const double proj = d_unit.row(i).dot(n.unit.row(i));
        d.row(i) = (d_unit.row(i) - proj * n.unit.row(i)) / n.norm(i);
    }
    return d;
}

}  // namespace

LossGrad bgrl_loss(const Mat& p1, const Mat& p2, const Mat& t1, const Mat& t2) {
    if (p1.rows() != t2.rows() || p2.rows() != t1.rows() || p1.rows() != p2.rows() || p1.rows() == 0 ||
        p1.cols() != t2.cols() || p2.cols() != t1.cols()) {
        throw ShapeError("bgrl_loss: mismatched batch shapes");
    }
    const auto a1 = normalize(p1);
    const auto a2 = normalize(p2);
    const auto b1 = normalize(t1);
    const auto b2 = normalize(t2);
    const double n = static_cast<double>(p1.rows());
    const double cos12 = (a1.unit.array() * b2.unit.array()).sum();
    const double cos21 = (a2.unit.array() * b1.unit.array()).sum();
    LossGrad out;
    out.loss = -0.5 * (cos12 + cos21) / n;
    out.d_first = normalize_backward(a1, b2.unit * (-0.5 / n));
    out.d_second = normalize_backward(a2, b1.unit * (-0.5 / n));
    return out;
}

LossGrad graphcl_loss(const Mat& z1, const Mat& z2, double tau) {
    if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) throw ShapeError("graphcl_loss: mismatched view shapes");
    if (z1.rows() < 2) throw ValidationError("graphcl_loss needs at least two samples for negatives");
    if (!(tau > 0.0)) throw ValidationError("temperature must be positive");
    const auto u = normalize(z1);
    const auto v = normalize(z2);
    const Eigen::Index n = z1.rows();
    const Mat s = (u.unit * v.unit.transpose()) / tau;

    // Row-wise softmax of s (view 1 anchors) and of s^T (view 2 anchors).
    auto softmax_rows = [](const Mat& m, double& loss_sum) {
        Mat p(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double mx = m.row(i).maxCoeff();
            const RowVec e = (m.row(i).array() - mx).exp().matrix();
            const double z = e.sum();
            p.row(i) = e / z;
            loss_sum += -(m(i, i) - mx - std::log(z));
        }
        return p;
    };
    double total = 0.0;
    Mat p_rows = softmax_rows(s, total);
    Mat p_cols = softmax_rows(s.transpose(), total);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));

    Mat ds = p_rows + p_cols.transpose();
    ds.diagonal().array() -= 2.0;
    ds *= scale / tau;  // d loss / d (u v^T)

    LossGrad out;
    out.loss = total * scale;
    out.d_first = normalize_backward(u, ds * v.unit);
    out.d_second = normalize_backward(v, ds.transpose() * u.unit);
    return out;
}

void ema_update(const std::vector<nn::Param*>& target, const std::vector<nn::Param*>& online, double m) {
    if (target.size() != online.size()) throw ShapeError("ema_update: parameter lists differ in length");
    if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("ema momentum must lie in [0, 1]");
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i]->value.rows() != online[i]->value.rows() || target[i]->value.cols() != online[i]->value.cols()) {
            throw ShapeError("ema_update: shape mismatch for '" + target[i]->name + "'");
        }
    }
    if (m == 1.0) return;
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i]->value = m * target[i]->value + (1.0 - m) * online[i]->value;
    }
}

double momentum_schedule(long step, long total_steps, double m_base) {
    if (total_steps <= 0 || step >= total_steps) return 1.0;
    if (step <= 0) return m_base;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return 1.0 - (1.0 - m_base) * (std::cos(kPi * frac) + 1.0) / 2.0;
}

}  // namespace tsg
