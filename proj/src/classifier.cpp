#include "tsg/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace tsg {

void ClassifierConfig::validate() const {
    if (epochs <= 0 || batch_size <= 0 || hidden <= 0) throw ValidationError("classifier sizes must be positive");
    if (!(lr > 0.0) || !(weight_decay >= 0.0)) throw ValidationError("classifier optimizer settings invalid");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("classifier threshold must lie in (0, 1)");
}

LabelClassifier::LabelClassifier(int input_dim, const std::vector<std::string>& vocab, const ClassifierConfig& config)
    : vocab_(vocab), config_(config) {
    if (vocab.empty()) throw ValidationError("classifier needs a non-empty label vocabulary");
    config.validate();
    Rng rng = derive_rng(config.seed, 0xC1A5);
    net_ = nn::Mlp("classifier", input_dim, config.hidden, static_cast<int>(vocab.size()), rng);
}

Mat label_matrix(const std::vector<LabelSet>& labels, const std::vector<std::string>& vocab) {
    Mat y = Mat::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(vocab.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (const auto& l : labels[i]) {
            const auto it = std::find(vocab.begin(), vocab.end(), l);
            if (it == vocab.end()) throw ValidationError("label '" + l + "' is not in the vocabulary");
            y(static_cast<Eigen::Index>(i), it - vocab.begin()) = 1.0;
        }
    }
    return y;
}

double bce_with_logits(const Mat& logits, const Mat& targets, Mat* d_logits) {
    const double cells = static_cast<double>(logits.size());
    double loss = 0.0;
    if (d_logits != nullptr) d_logits->resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double x = logits.data()[i];
        const double y = targets.data()[i];
        // log(1 + e^x) - y x, computed stably
        loss += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
        if (d_logits != nullptr) d_logits->data()[i] = (1.0 / (1.0 + std::exp(-x)) - y) / cells;
    }
    return loss / cells;
}

std::vector<double> LabelClassifier::fit(const Mat& x, const std::vector<LabelSet>& labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty()) {
        throw ValidationError("classifier: embeddings and label sets must be non-empty and aligned");
    }
    const Mat y = label_matrix(labels, vocab_);
    std::vector<nn::Param*> params;
    net_.collect(params);
    nn::AdamW opt(config_.lr, config_.weight_decay);
    std::vector<double> history;
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng = derive_rng(config_.seed, static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
        double sum = 0.0;
        for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(config_.batch_size)) {
            const std::size_t e = std::min(n, b + static_cast<std::size_t>(config_.batch_size));
            Mat xb(static_cast<Eigen::Index>(e - b), x.cols());
            Mat yb(static_cast<Eigen::Index>(e - b), y.cols());
            for (std::size_t k = b; k < e; ++k) {
                xb.row(static_cast<Eigen::Index>(k - b)) = x.row(static_cast<Eigen::Index>(order[k]));
                yb.row(static_cast<Eigen::Index>(k - b)) = y.row(static_cast<Eigen::Index>(order[k]));
            }
            nn::zero_grads(params);
            nn::Mlp::Tape tape;
            const Mat out = net_.forward(xb, &tape);
            Mat d;
            sum += bce_with_logits(out, yb, &d) * static_cast<double>(e - b);
            net_.backward(tape, d);
            opt.step(params);
        }
        history.push_back(sum / static_cast<double>(n));
    }
    return history;
}

Mat LabelClassifier::logits(const Mat& x) const { return net_.forward(x); }

Mat LabelClassifier::probabilities(const Mat& x) const {
    return logits(x).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

std::vector<LabelSet> LabelClassifier::predict(const Mat& x) const {
    const Mat p = probabilities(x);
    std::vector<LabelSet> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (p(i, j) > config_.threshold) out[static_cast<std::size_t>(i)].insert(vocab_[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

}  // namespace tsg
