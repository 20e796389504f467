#pragma once

#include "tsg/metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsg {

struct EmbeddingSet {
    std::vector<std::string> ids;
    Mat vectors;  // one unit-norm row per id
    std::optional<std::vector<LabelSet>> label_sets;

    std::size_t size() const { return ids.size(); }
    /// Unique ids, rows unit-norm within `tol`, aligned label sets.
    void validate(double tol = 1e-5) const;
    /// Row index of `id`, or throws ValidationError.
    std::size_t index_of(const std::string& id) const;
    EmbeddingSet subset(const std::vector<std::size_t>& rows) const;
};

struct Neighbor {
    std::string id;
    double distance = 0.0;
    bool operator==(const Neighbor&) const = default;
};

double cosine_distance(const RowVec& a, const RowVec& b);

/// Exact k nearest rows by cosine distance, ascending, ties by id.
std::vector<Neighbor> knn_query(const EmbeddingSet& store, const RowVec& query, std::size_t k);

}  // namespace tsg
