#include "tsg/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tsg {

double contain_accuracy(const std::vector<LabelSet>& predicted, const std::vector<LabelSet>& truth) {
    if (predicted.size() != truth.size()) throw ValidationError("contain_accuracy: length mismatch");
    if (truth.empty()) throw ValidationError("contain_accuracy: no samples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (std::includes(predicted[i].begin(), predicted[i].end(), truth[i].begin(), truth[i].end())) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double average_precision(const std::vector<bool>& relevant) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < relevant.size(); ++k) {
        if (!relevant[k]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double sample_auprc(const Mat& scores, const std::vector<LabelSet>& truth, const std::vector<std::string>& vocab) {
    if (static_cast<std::size_t>(scores.rows()) != truth.size() ||
        static_cast<std::size_t>(scores.cols()) != vocab.size()) {
        throw ValidationError("sample_auprc: score matrix shape does not match samples x vocabulary");
    }
    double total = 0.0;
    std::size_t used = 0;
    std::vector<std::size_t> order(vocab.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].empty()) continue;
        std::iota(order.begin(), order.end(), 0);
        const auto row = static_cast<Eigen::Index>(i);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores(row, static_cast<Eigen::Index>(a)) > scores(row, static_cast<Eigen::Index>(b));
        });
        std::vector<bool> rel(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) rel[k] = truth[i].count(vocab[order[k]]) > 0;
        total += average_precision(rel);
        ++used;
    }
    if (used == 0) throw ValidationError("sample_auprc: every true label set is empty");
    return total / static_cast<double>(used);
}

std::map<int, std::string> primary_labels(const std::vector<int>& assignment, const std::vector<LabelSet>& labels) {
    if (assignment.size() != labels.size()) throw ValidationError("primary_labels: length mismatch");
    std::map<int, std::map<std::string, std::size_t>> counts;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] < 0) continue;
        auto& c = counts[assignment[i]];
        for (const auto& l : labels[i]) ++c[l];
    }
    std::map<int, std::string> out;
    for (const auto& [cluster, c] : counts) {
        std::size_t best = 0;
        for (const auto& [label, n] : c) {
            if (n > best) {  // map order: first maximum is lexicographically smallest
                best = n;
                out[cluster] = label;
            }
        }
    }
    return out;
}

double multilabel_acc(const std::vector<int>& assignment, const std::vector<LabelSet>& labels,
                      const std::map<int, std::string>& primary) {
    if (assignment.size() != labels.size()) throw ValidationError("multilabel_acc: length mismatch");
    std::size_t clustered = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] < 0) continue;
        ++clustered;
        const auto it = primary.find(assignment[i]);
        if (it != primary.end() && labels[i].count(it->second) > 0) ++hits;
    }
    if (clustered == 0) throw ValidationError("multilabel_acc: no clustered samples");
    for (const auto& entry : primary) {
        if (std::find(assignment.begin(), assignment.end(), entry.first) == assignment.end()) {
            throw ValidationError("multilabel_acc: cluster " + std::to_string(entry.first) + " has no members");
        }
    }
    return static_cast<double>(hits) / static_cast<double>(clustered);
}

std::optional<double> try_silhouette_clustered(const Mat& x, const std::vector<int>& assignment) {
    if (static_cast<std::size_t>(x.rows()) != assignment.size()) {
        throw ValidationError("silhouette: length mismatch");
    }
    std::vector<Eigen::Index> idx;
    std::map<int, int> cluster_index;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] < 0) continue;
        idx.push_back(static_cast<Eigen::Index>(i));
        cluster_index.emplace(assignment[i], 0);
    }
    if (cluster_index.size() < 2) return std::nullopt;
    int k = 0;
    for (auto& [c, i] : cluster_index) i = k++;
    std::vector<std::size_t> cid(idx.size());
    std::vector<std::size_t> sizes(cluster_index.size(), 0);
    for (std::size_t p = 0; p < idx.size(); ++p) {
        cid[p] = static_cast<std::size_t>(cluster_index[assignment[static_cast<std::size_t>(idx[p])]]);
        ++sizes[cid[p]];
    }

    double total = 0.0;
    std::vector<double> sum(cluster_index.size());
    for (std::size_t p = 0; p < idx.size(); ++p) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t q = 0; q < idx.size(); ++q) {
            if (p != q) sum[cid[q]] += (x.row(idx[p]) - x.row(idx[q])).norm();
        }
        const std::size_t own = cid[p];
        if (sizes[own] == 1) continue;  // singleton clusters score 0
        const double a = sum[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            if (c != own) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(idx.size());
}

double silhouette_clustered(const Mat& x, const std::vector<int>& assignment) {
    const auto s = try_silhouette_clustered(x, assignment);
    if (!s) throw ValidationError("silhouette requires at least two clusters among assigned points");
    return *s;
}

}  // namespace tsg
