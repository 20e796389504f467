#include "tsg/embedding_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace tsg {

void EmbeddingSet::validate(double tol) const {
    if (static_cast<std::size_t>(vectors.rows()) != ids.size()) {
        throw ValidationError("embedding set: id count does not match vector rows");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw ValidationError("embedding set: duplicate id '" + id + "'");
    }
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        if (std::abs(vectors.row(i).norm() - 1.0) > tol) {
            throw ValidationError("embedding set: row for '" + ids[static_cast<std::size_t>(i)] + "' is not unit norm");
        }
    }
    if (label_sets && label_sets->size() != ids.size()) {
        throw ValidationError("embedding set: label sets do not align with ids");
    }
}

std::size_t EmbeddingSet::index_of(const std::string& id) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw ValidationError("unknown scenario id '" + id + "'");
    return static_cast<std::size_t>(it - ids.begin());
}

EmbeddingSet EmbeddingSet::subset(const std::vector<std::size_t>& rows) const {
    EmbeddingSet out;
    out.vectors.resize(static_cast<Eigen::Index>(rows.size()), vectors.cols());
    if (label_sets) out.label_sets.emplace();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.ids.push_back(ids.at(rows[k]));
        out.vectors.row(static_cast<Eigen::Index>(k)) = vectors.row(static_cast<Eigen::Index>(rows[k]));
        if (label_sets) out.label_sets->push_back((*label_sets)[rows[k]]);
    }
    return out;
}

double cosine_distance(const RowVec& a, const RowVec& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw ValidationError("cosine distance of a zero vector");
    if (a == b) return 0.0;
    return std::max(0.0, 1.0 - a.dot(b) / (na * nb));
}

std::vector<Neighbor> knn_query(const EmbeddingSet& store, const RowVec& query, std::size_t k) {
    if (store.size() == 0) throw ValidationError("knn_query: empty store");
    if (k < 1 || k > store.size()) {
        throw ValidationError("knn_query: k must lie in [1, " + std::to_string(store.size()) + "]");
    }
    if (query.size() != store.vectors.cols()) throw ShapeError("knn_query: query dimension mismatch");
    std::vector<Neighbor> all;
    all.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        all.push_back({store.ids[i], cosine_distance(store.vectors.row(static_cast<Eigen::Index>(i)), query)});
    }
    auto less = [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
    all.resize(k);
    return all;
}

}  // namespace tsg
