#include "tsg/augment.hpp"

namespace tsg {

namespace {

EdgeTable filter_edges(const EdgeTable& e, double p, Rng& rng) {
    std::bernoulli_distribution drop(p);
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (!drop(rng)) keep.push_back(static_cast<Eigen::Index>(k));
    }
    EdgeTable out;
    out.features.resize(static_cast<Eigen::Index>(keep.size()), e.features.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const auto k = static_cast<std::size_t>(keep[r]);
        out.src.push_back(e.src[k]);
        out.dst.push_back(e.dst[k]);
        out.subtype.push_back(e.subtype[k]);
        out.features.row(static_cast<Eigen::Index>(r)) = e.features.row(keep[r]);
    }
    return out;
}

void mask_columns(Mat& x, const std::vector<ColumnGroup>& groups, double p, Rng& rng, MaskMode mode) {
    std::bernoulli_distribution drop(p);
    if (mode == MaskMode::column) {
        for (const auto& g : groups) {
            if (drop(rng)) x.middleCols(g.begin, g.end - g.begin).setZero();
        }
        return;
    }
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (const auto& g : groups) {
            if (drop(rng)) x.row(r).segment(g.begin, g.end - g.begin).setZero();
        }
    }
}

void noise_columns(Mat& x, const std::vector<ColumnGroup>& groups, double p, double sigma, Rng& rng) {
    std::bernoulli_distribution pick(p);
    std::normal_distribution<double> noise(0.0, sigma);
    for (const auto& g : groups) {
        if (g.one_hot || !pick(rng)) continue;
        for (int c = g.begin; c < g.end; ++c) {
            for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) += noise(rng);
        }
    }
}

int pe_dim_of(const HeteroGraph& g) {
    return static_cast<int>(g.obstacle_x.cols()) - kObstacleBaseFeatures - kNumObstacleTypes - kNumObstacleRoles;
}

int centerline_points_of(const HeteroGraph& g) { return (static_cast<int>(g.road_x.cols()) - kNumRoadTypes) / 3; }

}  // namespace

void AugmentConfig::validate() const {
    for (double p : {p_edge_drop, p_attr_drop, p_attr_noise, p_min, p_max}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("augment probabilities must lie in [0, 1]");
    }
    if (p_min > p_max) throw ValidationError("augment.p_min must not exceed augment.p_max");
    if (!(noise_sigma >= 0.0)) throw ValidationError("augment.noise_sigma must be >= 0");
}

std::vector<ColumnGroup> obstacle_column_groups(int pe_dim) {
    std::vector<ColumnGroup> g;
    for (int c = 0; c < kObstacleBaseFeatures; ++c) g.push_back({c, c + 1, false});
    int c = kObstacleBaseFeatures;
    g.push_back({c, c + kNumObstacleTypes, true});
    c += kNumObstacleTypes;
    g.push_back({c, c + kNumObstacleRoles, true});
    c += kNumObstacleRoles;
    for (int k = 0; k < pe_dim; ++k, ++c) g.push_back({c, c + 1, false});
    return g;
}

std::vector<ColumnGroup> road_column_groups(int centerline_points) {
    std::vector<ColumnGroup> g;
    const int continuous = 3 * centerline_points;
    for (int c = 0; c < continuous; ++c) g.push_back({c, c + 1, false});
    g.push_back({continuous, continuous + kNumRoadTypes, true});
    return g;
}

HeteroGraph drop_edges(const HeteroGraph& g, double p, Rng& rng) {
    HeteroGraph out = g;
    out.o2o = filter_edges(g.o2o, p, rng);
    out.r2r = filter_edges(g.r2r, p, rng);
    out.o2r = filter_edges(g.o2r, p, rng);
    out.temporal = filter_edges(g.temporal, p, rng);
    return out;
}

HeteroGraph drop_attributes(const HeteroGraph& g, double p, Rng& rng, MaskMode mode) {
    HeteroGraph out = g;
    mask_columns(out.obstacle_x, obstacle_column_groups(pe_dim_of(g)), p, rng, mode);
    if (g.road_x.cols() > 0) mask_columns(out.road_x, road_column_groups(centerline_points_of(g)), p, rng, mode);
    return out;
}

HeteroGraph perturb_attributes(const HeteroGraph& g, double p, double sigma, Rng& rng) {
    HeteroGraph out = g;
    if (sigma == 0.0) return out;
    noise_columns(out.obstacle_x, obstacle_column_groups(pe_dim_of(g)), p, sigma, rng);
    if (g.road_x.cols() > 0) noise_columns(out.road_x, road_column_groups(centerline_points_of(g)), p, sigma, rng);
    return out;
}

HeteroGraph sample_view(const HeteroGraph& g, const AugmentConfig& config, Rng& rng) {
    double pe = config.p_edge_drop;
    double pd = config.p_attr_drop;
    double pn = config.p_attr_noise;
    if (config.resample_p) {
        std::uniform_real_distribution<double> u(config.p_min, config.p_max);
        pe = u(rng);
        pd = u(rng);
        pn = u(rng);
    }
    HeteroGraph v = drop_edges(g, pe, rng);
    v = drop_attributes(v, pd, rng, config.mask_mode);
    return perturb_attributes(v, pn, config.noise_sigma, rng);
}

}  // namespace tsg
