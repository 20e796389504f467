#pragma once

#include "tsg/classifier.hpp"
#include "tsg/embedding_set.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsg {

struct ClusterReport {
    int mcs = 0;
    std::vector<std::string> ids;
    std::vector<int> assignment;  // -1 = unclustered
    int num_clusters = 0;
    double unclustered_ratio = 0.0;
    std::map<int, std::string> primary_label;
    std::optional<double> multilabel_acc;  // needs label sets and >= 1 clustered point
    std::optional<double> silhouette;      // needs >= 2 clusters
    std::string silhouette_status;         // "ok" or the reason it is undefined
};

/// HDBSCAN over the set's vectors plus every derived metric.
ClusterReport cluster_embeddings(const EmbeddingSet& set, int mcs, int min_samples = 0);

nlohmann::json to_json(const ClusterReport& r, bool with_assignment = true);

/// Per-cluster member lists: cluster,scenario_id,labels.
void write_cluster_csv(const std::filesystem::path& path, const ClusterReport& r, const EmbeddingSet& set);

struct ClassifierReport {
    double contain_accuracy = 0.0;
    double auprc = 0.0;
    double majority_baseline = 0.0;  // contain accuracy of always predicting {most frequent train label}
    std::string majority_label;
    double shuffled_contain_accuracy = 0.0;  // trained on permuted label sets
    double shuffled_auprc = 0.0;
    std::vector<double> loss_history;
};

ClassifierReport evaluate_classifier(const EmbeddingSet& train, const EmbeddingSet& test,
                                     const std::vector<std::string>& vocab, const ClassifierConfig& config);

nlohmann::json to_json(const ClassifierReport& r);

}  // namespace tsg
