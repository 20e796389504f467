#pragma once

#include "tsg/graph.hpp"

#include <vector>

namespace tsg {

enum class MaskMode { column, cell };

/// Augmentation settings. When `resample_p` is set, sample_view draws each
/// probability uniformly from [p_min, p_max] per view; otherwise the fixed
/// per-operation probabilities are used.
struct AugmentConfig {
    double p_edge_drop = 0.15;
    double p_attr_drop = 0.15;
    double p_attr_noise = 0.15;
    double noise_sigma = 1.0;
    double p_min = 0.1;
    double p_max = 0.2;
    bool resample_p = true;
    MaskMode mask_mode = MaskMode::column;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Groups of feature columns that are dropped together. One-hot blocks form a
/// single group; every continuous column is its own group.
struct ColumnGroup {
    int begin = 0;
    int end = 0;  // exclusive
    bool one_hot = false;
};

std::vector<ColumnGroup> obstacle_column_groups(int pe_dim);
std::vector<ColumnGroup> road_column_groups(int centerline_points);

HeteroGraph drop_edges(const HeteroGraph& g, double p, Rng& rng);
HeteroGraph drop_attributes(const HeteroGraph& g, double p, Rng& rng, MaskMode mode = MaskMode::column);
HeteroGraph perturb_attributes(const HeteroGraph& g, double p, double sigma, Rng& rng);

/// drop_edges -> drop_attributes -> perturb_attributes.
HeteroGraph sample_view(const HeteroGraph& g, const AugmentConfig& config, Rng& rng);

}  // namespace tsg
