#pragma once

#include "tsg/metrics.hpp"
#include "tsg/nn.hpp"

#include <string>
#include <vector>

namespace tsg {

struct ClassifierConfig {
    int epochs = 100;
    int batch_size = 32;
    double lr = 1e-3;
    double weight_decay = 1e-3;
    int hidden = 512;
    double threshold = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Multi-label head with the predictor's shape: d -> hidden -> PReLU -> |vocab|.
class LabelClassifier {
public:
    LabelClassifier(int input_dim, const std::vector<std::string>& vocab, const ClassifierConfig& config);

    /// Mean per-label binary cross-entropy of each epoch.
    std::vector<double> fit(const Mat& x, const std::vector<LabelSet>& labels);

    Mat logits(const Mat& x) const;
    Mat probabilities(const Mat& x) const;
    std::vector<LabelSet> predict(const Mat& x) const;

    const std::vector<std::string>& vocab() const { return vocab_; }

private:
    std::vector<std::string> vocab_;
    ClassifierConfig config_;
    nn::Mlp net_;
};

/// Mean binary cross-entropy over all (sample, label) cells and its gradient
/// with respect to the logits.
double bce_with_logits(const Mat& logits, const Mat& targets, Mat* d_logits);

Mat label_matrix(const std::vector<LabelSet>& labels, const std::vector<std::string>& vocab);

}  // namespace tsg
