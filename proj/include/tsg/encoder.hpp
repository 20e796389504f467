#pragma once

#include "tsg/graph.hpp"
#include "tsg/nn.hpp"

#include <array>
#include <string>
#include <vector>

namespace tsg {

/// Incoming-edge structure of one relation, precomputed for mean aggregation.
struct Neighborhood {
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
    std::vector<double> inv_degree;  // per target; 0 for isolated targets
    Mat edge_mean;                   // per-target mean of incoming edge features
    std::size_t num_sources = 0;

    std::size_t num_targets() const { return inv_degree.size(); }
    static Neighborhood build(const std::vector<std::uint32_t>& src, const std::vector<std::uint32_t>& dst,
                              const Mat& edge_features, std::size_t num_sources, std::size_t num_targets);
};

/// x_i' = W1 x_i + W2 mean_j (x_j + We e_ij) + b
struct EdgeSageLayer {
    nn::Param w_self;   // d_out x d_target
    nn::Param w_neigh;  // d_out x d_source
    nn::Param w_edge;   // d_source x d_edge
    nn::Param bias;     // 1 x d_out

    EdgeSageLayer() = default;
    EdgeSageLayer(const std::string& name, int d_target, int d_source, int d_edge, int d_out, Rng& rng);
    void collect(std::vector<nn::Param*>& out);
};

/// Mean over neighbors of (x_j + We e_ij); zero rows for isolated targets.
Mat edge_sage_aggregate(const EdgeSageLayer& layer, const Mat& x_source, const Neighborhood& nb);

Mat edge_sage_forward(const EdgeSageLayer& layer, const Mat& x_target, const Mat& x_source, const Neighborhood& nb,
                      Mat* aggregate_out = nullptr);

/// Convenience overload operating directly on edge lists.
Mat edge_sage_forward(const EdgeSageLayer& layer, const Mat& x_target, const Mat& x_source,
                      const std::vector<std::uint32_t>& src, const std::vector<std::uint32_t>& dst,
                      const Mat& edge_features);

/// Accumulates parameter gradients; adds input gradients into d_target and
/// d_source when non-null (they may alias).
void edge_sage_backward(EdgeSageLayer& layer, const Mat& x_target, const Mat& aggregate, const Neighborhood& nb,
                        const Mat& d_out, Mat* d_target, Mat* d_source);

/// Several graphs merged into one disconnected graph. Obstacle nodes of graph b
/// occupy rows [obstacle_offsets[b], obstacle_offsets[b+1]).
struct GraphBatch {
    Mat obstacle_x;
    Mat road_x;
    Neighborhood o2o;
    Neighborhood temporal;
    Neighborhood r2o;  // reversed obstacle->road edges
    Neighborhood r2r;
    std::vector<std::size_t> obstacle_offsets;

    std::size_t num_graphs() const { return obstacle_offsets.empty() ? 0 : obstacle_offsets.size() - 1; }
    static GraphBatch build(const std::vector<const HeteroGraph*>& graphs);
    static GraphBatch build(const HeteroGraph& g) { return build(std::vector<const HeteroGraph*>{&g}); }
};

struct EncoderConfig {
    int obstacle_in = 31;
    int road_in = 33;
    std::array<int, 3> obstacle_hidden{32, 64, 128};
    std::array<int, 3> road_hidden{64, 128, 256};
    int embedding_dim = 128;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    static EncoderConfig for_builder(const BuilderConfig& b);
    void validate() const;
    bool operator==(const EncoderConfig&) const = default;
};

inline constexpr int kNumLayers = 3;

class HeteroEncoder {
public:
    struct LayerTape {
        Mat obstacle_in;
        Mat road_in;
        Mat agg_o2o;
        Mat agg_temporal;
        Mat agg_r2o;
        Mat agg_r2r;
        nn::BatchNorm::Tape bn_obstacle;
        nn::BatchNorm::Tape bn_road;
        Mat obstacle_out;  // after batch norm (and ReLU where applied)
        Mat road_out;
    };
    struct Tape {
        std::array<LayerTape, kNumLayers> layers;
        Mat node_embeddings;                  // final obstacle embeddings
        std::vector<Eigen::Index> argmin;     // graphs x dim, row-major
        std::vector<Eigen::Index> argmax;
        Mat pooled;                           // graphs x 3*dim
        std::vector<std::size_t> offsets;
    };

    HeteroEncoder() = default;
    HeteroEncoder(const EncoderConfig& config, Rng& rng);

    const EncoderConfig& config() const { return config_; }

    /// Graph embeddings, one row per graph in the batch (not normalized).
    Mat forward(const GraphBatch& batch, nn::BnMode mode, Tape* tape = nullptr) const;
    /// Eval-mode embedding of a single graph.
    RowVec encode(const HeteroGraph& g) const;

    /// Accumulates parameter gradients from d(embeddings). Optional input
    /// gradients for testing.
    void backward(const Tape& tape, const GraphBatch& batch, const Mat& d_embeddings, Mat* d_obstacle_x = nullptr,
                  Mat* d_road_x = nullptr);

    /// Applies the batch statistics recorded in a training-mode tape to the
    /// running estimates.
    void update_running_stats(const Tape& tape);

    std::vector<nn::Param*> parameters();
    std::vector<nn::Param*> buffers();
    /// Parameters followed by buffers.
    std::vector<nn::Param*> state();

private:
    EncoderConfig config_;
    std::array<EdgeSageLayer, kNumLayers> o2o_;
    std::array<EdgeSageLayer, kNumLayers> temporal_;
    std::array<EdgeSageLayer, kNumLayers> r2o_;
    std::array<EdgeSageLayer, kNumLayers> r2r_;
    std::array<nn::BatchNorm, kNumLayers> bn_obstacle_;
    std::array<nn::BatchNorm, kNumLayers> bn_road_;
    nn::Linear pool_;
};

/// Predictor / classifier head: 128 -> 512 -> PReLU -> out.
nn::Mlp make_predictor(const std::string& name, int in, int out, Rng& rng, int hidden = 512);

/// Rows scaled to unit L2 norm; throws ValidationError on a zero row.
Mat normalize_rows(const Mat& z);

}  // namespace tsg
