#pragma once

// Minimal dense building blocks with explicit forward/backward passes.
// Backward functions accumulate into Param::grad; callers zero gradients.

#include "tsg/common.hpp"

#include <string>
#include <vector>

namespace tsg::nn {

struct Param {
    std::string name;
    Mat value;
    Mat grad;

    Param() = default;
    Param(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}
};

void glorot_uniform(Mat& w, Rng& rng);
void zero_grads(const std::vector<Param*>& params);
double global_grad_norm(const std::vector<Param*>& params);
/// Scales gradients so that their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(const std::vector<Param*>& params, double max_norm);

struct Linear {
    Param weight;  // out x in
    Param bias;    // 1 x out

    Linear() = default;
    Linear(const std::string& name, int in, int out, Rng& rng);

    Mat forward(const Mat& x) const;
    /// Returns d/dx; accumulates weight and bias gradients.
    Mat backward(const Mat& x, const Mat& dy);
    void collect(std::vector<Param*>& out);
};

struct PReLU {
    Param slope;  // 1 x 1, shared across channels

    PReLU() = default;
    explicit PReLU(const std::string& name, double init = 0.25);

    Mat forward(const Mat& x) const;
    Mat backward(const Mat& x, const Mat& dy);
    void collect(std::vector<Param*>& out);
};

/// Two-layer perceptron: Linear -> PReLU -> Linear.
struct Mlp {
    Linear first;
    PReLU act;
    Linear second;

    struct Tape {
        Mat x;
        Mat hidden;  // pre-activation
        Mat activated;
    };

    Mlp() = default;
    Mlp(const std::string& name, int in, int hidden, int out, Rng& rng);

    Mat forward(const Mat& x, Tape* tape = nullptr) const;
    Mat backward(const Tape& tape, const Mat& dy);
    void collect(std::vector<Param*>& out);
};

enum class BnMode {
    train,  // batch statistics
    eval,   // running statistics
};

struct BatchNorm {
    Param gamma;  // 1 x d
    Param beta;   // 1 x d
    Param running_mean;  // buffers: never receive gradients
    Param running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    struct Tape {
        BnMode mode = BnMode::train;
        Mat xhat;
        RowVec inv_std;
        RowVec batch_mean;
        RowVec batch_var;  // biased
        Eigen::Index rows = 0;
    };

    BatchNorm() = default;
    BatchNorm(const std::string& name, int dim, double momentum = 0.1, double eps = 1e-5);

    Mat forward(const Mat& x, BnMode mode, Tape* tape) const;
    Mat backward(const Tape& tape, const Mat& dy);
    /// Folds the batch statistics from a training-mode tape into the running
    /// estimates (unbiased variance).
    void update_running(const Tape& tape);
    void collect(std::vector<Param*>& out);
    void collect_buffers(std::vector<Param*>& out);
};

Mat relu(const Mat& x);
/// dy masked where the forward output was not positive.
Mat relu_backward(const Mat& y, const Mat& dy);

/// AdamW with decoupled weight decay.
class AdamW {
public:
    AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Param*>& params);
    long steps() const { return t_; }

private:
    double lr_;
    double wd_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
};

}  // namespace tsg::nn
