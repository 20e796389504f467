#pragma once

#include "tsg/nn.hpp"

#include <vector>

namespace tsg {

/// Loss value together with gradients w.r.t. the two unnormalized inputs
/// that receive gradients.
struct LossGrad {
    double loss = 0.0;
    Mat d_first;
    Mat d_second;
};

/// -1/2 [cos(p1, t2) + cos(p2, t1)], averaged over rows. Gradients flow to the
/// predictions only.
LossGrad bgrl_loss(const Mat& p1, const Mat& p2, const Mat& t1, const Mat& t2);

/// Symmetric NT-Xent over in-batch negatives: row i of z1 is the positive of
/// row i of z2. Mean over the 2N cross-entropy terms.
LossGrad graphcl_loss(const Mat& z1, const Mat& z2, double tau);

/// p_t <- m p_t + (1 - m) p_o for every parameter pair.
void ema_update(const std::vector<nn::Param*>& target, const std::vector<nn::Param*>& online, double m);

/// 1 - (1 - m_base) (cos(pi t / T) + 1) / 2, clamped to 1 for t >= T.
double momentum_schedule(long step, long total_steps, double m_base);

}  // namespace tsg
