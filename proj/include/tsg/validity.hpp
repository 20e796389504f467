#pragma once

#include "tsg/augment.hpp"
#include "tsg/graph.hpp"

#include <functional>
#include <vector>

namespace tsg {

class HeteroEncoder;

/// Maps a batch of graphs to embeddings (one row each).
using EmbedFn = std::function<Mat(const std::vector<HeteroGraph>&)>;

/// Each trial draws G1 and a distinct G2 uniformly from `graphs` plus an
/// augmented view of G1 and counts d(G1, view) < d(G1, G2) with cosine
/// distance. Returns the fraction of successful trials.
double embedding_validity_rate(const std::vector<HeteroGraph>& graphs, const EmbedFn& embed,
                               const AugmentConfig& augment, std::size_t trials, std::uint64_t seed);

/// Convenience overload using an encoder in eval mode.
double embedding_validity_rate(const std::vector<HeteroGraph>& graphs, const HeteroEncoder& encoder,
                               const AugmentConfig& augment, std::size_t trials, std::uint64_t seed);

}  // namespace tsg
