#include "tsg/evaluation.hpp"

#include "tsg/hdbscan.hpp"

#include <algorithm>
#include <fstream>

namespace tsg {

using nlohmann::json;

ClusterReport cluster_embeddings(const EmbeddingSet& set, int mcs, int min_samples) {
    ClusterReport r;
    r.mcs = mcs;
    r.ids = set.ids;
    const auto h = hdbscan(set.vectors, mcs, min_samples);
    r.assignment = h.labels;
    r.num_clusters = h.num_clusters;
    const auto noise = std::count(h.labels.begin(), h.labels.end(), -1);
    r.unclustered_ratio = static_cast<double>(noise) / static_cast<double>(h.labels.size());
    if (set.label_sets && noise < static_cast<long>(h.labels.size())) {
        r.primary_label = primary_labels(r.assignment, *set.label_sets);
        r.multilabel_acc = multilabel_acc(r.assignment, *set.label_sets, r.primary_label);
    }
    r.silhouette = try_silhouette_clustered(set.vectors, r.assignment);
    r.silhouette_status = r.silhouette ? "ok" : "undefined: fewer than two clusters";
    return r;
}

json to_json(const ClusterReport& r, bool with_assignment) {
    json j;
    j["mcs"] = r.mcs;
    j["num_clusters"] = r.num_clusters;
    j["unclustered_ratio"] = r.unclustered_ratio;
    j["multilabel_acc"] = r.multilabel_acc ? json(*r.multilabel_acc) : json(nullptr);
    j["silhouette"] = r.silhouette ? json(*r.silhouette) : json(nullptr);
    j["silhouette_status"] = r.silhouette_status;
    json primary = json::object();
    for (const auto& [c, l] : r.primary_label) primary[std::to_string(c)] = l;
    j["primary_label"] = primary;
    if (with_assignment) {
        json a = json::object();
        for (std::size_t i = 0; i < r.ids.size(); ++i) a[r.ids[i]] = r.assignment[i];
        j["assignment"] = a;
    }
    return j;
}

void write_cluster_csv(const std::filesystem::path& path, const ClusterReport& r, const EmbeddingSet& set) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    out << "cluster,scenario_id,labels\n";
    std::vector<std::size_t> order(r.ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.assignment[a] < r.assignment[b]; });
    for (auto i : order) {
        out << r.assignment[i] << ',' << r.ids[i] << ',';
        if (set.label_sets) {
            bool first = true;
            for (const auto& l : (*set.label_sets)[i]) {
                out << (first ? "" : ";") << l;
                first = false;
            }
        }
        out << '\n';
    }
}

ClassifierReport evaluate_classifier(const EmbeddingSet& train, const EmbeddingSet& test,
                                     const std::vector<std::string>& vocab, const ClassifierConfig& config) {
    if (!train.label_sets || !test.label_sets) throw ValidationError("classifier evaluation needs label sets");
    ClassifierReport r;
    const auto& truth = *test.label_sets;

    LabelClassifier clf(static_cast<int>(train.vectors.cols()), vocab, config);
    r.loss_history = clf.fit(train.vectors, *train.label_sets);
    r.contain_accuracy = contain_accuracy(clf.predict(test.vectors), truth);
    r.auprc = sample_auprc(clf.probabilities(test.vectors), truth, vocab);

    std::map<std::string, std::size_t> freq;
    for (const auto& s : *train.label_sets) {
        for (const auto& l : s) ++freq[l];
    }
    std::size_t best = 0;
    for (const auto& [l, n] : freq) {
        if (n > best) {
            best = n;
            r.majority_label = l;
        }
    }
    const std::vector<LabelSet> majority(truth.size(), LabelSet{r.majority_label});
    r.majority_baseline = contain_accuracy(majority, truth);

    // Control: identical training on label sets permuted across samples.
    std::vector<LabelSet> shuffled = *train.label_sets;
    Rng rng = derive_rng(config.seed, 0x5A5A);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng() % i)]);
    }
    LabelClassifier control(static_cast<int>(train.vectors.cols()), vocab, config);
    control.fit(train.vectors, shuffled);
    r.shuffled_contain_accuracy = contain_accuracy(control.predict(test.vectors), truth);
    r.shuffled_auprc = sample_auprc(control.probabilities(test.vectors), truth, vocab);
    return r;
}

json to_json(const ClassifierReport& r) {
    return {{"contain_accuracy", r.contain_accuracy},
            {"auprc", r.auprc},
            {"majority_label", r.majority_label},
            {"majority_baseline", r.majority_baseline},
            {"shuffled_contain_accuracy", r.shuffled_contain_accuracy},
            {"shuffled_auprc", r.shuffled_auprc},
            {"final_loss", r.loss_history.empty() ? json(nullptr) : json(r.loss_history.back())}};
}

}  // namespace tsg
