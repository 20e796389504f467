#include "tsg/encoder.hpp"

#include <cmath>
#include <limits>

namespace tsg {

using nn::BnMode;
using nn::Param;

// --- Neighborhood / EdgeSage ------------------------------------------------

Neighborhood Neighborhood::build(const std::vector<std::uint32_t>& src, const std::vector<std::uint32_t>& dst,
                                 const Mat& edge_features, std::size_t num_sources, std::size_t num_targets) {
    if (src.size() != dst.size() || static_cast<Eigen::Index>(src.size()) != edge_features.rows()) {
        throw ShapeError("edge arrays and edge feature rows disagree");
    }
    Neighborhood nb;
    nb.src = src;
    nb.dst = dst;
    nb.num_sources = num_sources;
    nb.inv_degree.assign(num_targets, 0.0);
    nb.edge_mean = Mat::Zero(static_cast<Eigen::Index>(num_targets), edge_features.cols());
    std::vector<int> degree(num_targets, 0);
    for (std::size_t e = 0; e < src.size(); ++e) {
        if (src[e] >= num_sources || dst[e] >= num_targets) throw ShapeError("edge index out of range");
        ++degree[dst[e]];
        nb.edge_mean.row(dst[e]) += edge_features.row(static_cast<Eigen::Index>(e));
    }
    for (std::size_t i = 0; i < num_targets; ++i) {
        if (degree[i] > 0) {
            nb.inv_degree[i] = 1.0 / degree[i];
            nb.edge_mean.row(static_cast<Eigen::Index>(i)) *= nb.inv_degree[i];
        }
    }
    return nb;
}

EdgeSageLayer::EdgeSageLayer(const std::string& name, int d_target, int d_source, int d_edge, int d_out, Rng& rng)
    : w_self(name + ".w_self", d_out, d_target),
      w_neigh(name + ".w_neigh", d_out, d_source),
      w_edge(name + ".w_edge", d_source, d_edge),
      bias(name + ".bias", 1, d_out) {
    nn::glorot_uniform(w_self.value, rng);
    nn::glorot_uniform(w_neigh.value, rng);
    nn::glorot_uniform(w_edge.value, rng);
}

void EdgeSageLayer::collect(std::vector<Param*>& out) {
    out.push_back(&w_self);
    out.push_back(&w_neigh);
    out.push_back(&w_edge);
    out.push_back(&bias);
}

namespace {

void check_shapes(const EdgeSageLayer& layer, const Mat& x_target, const Mat& x_source, const Neighborhood& nb) {
    if (x_target.cols() != layer.w_self.value.cols() || x_source.cols() != layer.w_neigh.value.cols() ||
        nb.edge_mean.cols() != layer.w_edge.value.cols() ||
        static_cast<std::size_t>(x_target.rows()) != nb.num_targets() ||
        static_cast<std::size_t>(x_source.rows()) != nb.num_sources) {
        throw ShapeError("edge_sage: input shapes do not match layer or neighborhood");
    }
}

}  // namespace

Mat edge_sage_aggregate(const EdgeSageLayer& layer, const Mat& x_source, const Neighborhood& nb) {
    Mat agg = nb.edge_mean * layer.w_edge.value.transpose();
    for (std::size_t e = 0; e < nb.src.size(); ++e) {
        agg.row(nb.dst[e]) += nb.inv_degree[nb.dst[e]] * x_source.row(nb.src[e]);
    }
    return agg;
}

Mat edge_sage_forward(const EdgeSageLayer& layer, const Mat& x_target, const Mat& x_source, const Neighborhood& nb,
                      Mat* aggregate_out) {
    check_shapes(layer, x_target, x_source, nb);
    Mat agg = edge_sage_aggregate(layer, x_source, nb);
    Mat out = x_target * layer.w_self.value.transpose();
    out.noalias() += agg * layer.w_neigh.value.transpose();
    out.rowwise() += layer.bias.value.row(0);
    if (aggregate_out != nullptr) *aggregate_out = std::move(agg);
    return out;
}

Mat edge_sage_forward(const EdgeSageLayer& layer, const Mat& x_target, const Mat& x_source,
                      const std::vector<std::uint32_t>& src, const std::vector<std::uint32_t>& dst,
                      const Mat& edge_features) {
    const auto nb = Neighborhood::build(src, dst, edge_features, static_cast<std::size_t>(x_source.rows()),
                                        static_cast<std::size_t>(x_target.rows()));
    return edge_sage_forward(layer, x_target, x_source, nb);
}

namespace {

// Everything in the EdgeSage backward pass except the self term.
void neighbor_backward(EdgeSageLayer& layer, const Mat& aggregate, const Neighborhood& nb, const Mat& d_out,
                       Mat* d_source) {
    layer.w_neigh.grad.noalias() += d_out.transpose() * aggregate;
    layer.bias.grad += d_out.colwise().sum();
    const Mat d_agg = d_out * layer.w_neigh.value;
    layer.w_edge.grad.noalias() += d_agg.transpose() * nb.edge_mean;
    if (d_source != nullptr) {
        for (std::size_t e = 0; e < nb.src.size(); ++e) {
            d_source->row(nb.src[e]) += nb.inv_degree[nb.dst[e]] * d_agg.row(nb.dst[e]);
        }
    }
}

}  // namespace

void edge_sage_backward(EdgeSageLayer& layer, const Mat& x_target, const Mat& aggregate, const Neighborhood& nb,
                        const Mat& d_out, Mat* d_target, Mat* d_source) {
    layer.w_self.grad.noalias() += d_out.transpose() * x_target;
    if (d_target != nullptr) d_target->noalias() += d_out * layer.w_self.value;
    neighbor_backward(layer, aggregate, nb, d_out, d_source);
}

// --- GraphBatch -------------------------------------------------------------

GraphBatch GraphBatch::build(const std::vector<const HeteroGraph*>& graphs) {
    if (graphs.empty()) throw ValidationError("empty graph batch");
    Eigen::Index n_obs = 0;
    Eigen::Index n_road = 0;
    for (const auto* g : graphs) {
        if (g->obstacle_x.rows() == 0) throw ValidationError("graph '" + g->scenario_id + "' has no obstacle nodes");
        n_obs += g->obstacle_x.rows();
        n_road += g->road_x.rows();
    }
    GraphBatch b;
    const auto obs_cols = graphs.front()->obstacle_x.cols();
    const auto road_cols = graphs.front()->road_x.cols();
    b.obstacle_x.resize(n_obs, obs_cols);
    b.road_x.resize(n_road, road_cols);

    struct Edges {
        std::vector<std::uint32_t> src, dst;
        std::vector<const Mat*> feats;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
    };
    Edges o2o, temporal, r2o, r2r;
    auto append = [](Edges& out, const EdgeTable& e, std::uint32_t src_off, std::uint32_t dst_off, bool reverse) {
        for (std::size_t k = 0; k < e.size(); ++k) {
            const auto s = reverse ? e.dst[k] : e.src[k];
            const auto d = reverse ? e.src[k] : e.dst[k];
            out.src.push_back(s + src_off);
            out.dst.push_back(d + dst_off);
        }
        out.feats.push_back(&e.features);
        out.rows += e.features.rows();
        out.cols = e.features.cols();
    };

    Eigen::Index obs_off = 0;
    Eigen::Index road_off = 0;
    b.obstacle_offsets.push_back(0);
    for (const auto* g : graphs) {
        if (g->obstacle_x.cols() != obs_cols || g->road_x.cols() != road_cols) {
            throw ShapeError("graphs in a batch must share feature widths");
        }
        b.obstacle_x.middleRows(obs_off, g->obstacle_x.rows()) = g->obstacle_x;
        b.road_x.middleRows(road_off, g->road_x.rows()) = g->road_x;
        const auto oo = static_cast<std::uint32_t>(obs_off);
        const auto ro = static_cast<std::uint32_t>(road_off);
        append(o2o, g->o2o, oo, oo, false);
        append(temporal, g->temporal, oo, oo, false);
        append(r2o, g->o2r, ro, oo, true);
        append(r2r, g->r2r, ro, ro, false);
        obs_off += g->obstacle_x.rows();
        road_off += g->road_x.rows();
        b.obstacle_offsets.push_back(static_cast<std::size_t>(obs_off));
    }

    auto finish = [](const Edges& e, Eigen::Index ns, Eigen::Index nt) {
        Mat f(e.rows, e.cols);
        Eigen::Index r = 0;
        for (const auto* m : e.feats) {
            f.middleRows(r, m->rows()) = *m;
            r += m->rows();
        }
        return Neighborhood::build(e.src, e.dst, f, static_cast<std::size_t>(ns), static_cast<std::size_t>(nt));
    };
    b.o2o = finish(o2o, n_obs, n_obs);
    b.temporal = finish(temporal, n_obs, n_obs);
    b.r2o = finish(r2o, n_road, n_obs);
    b.r2r = finish(r2r, n_road, n_road);
    return b;
}

// --- HeteroEncoder ----------------------------------------------------------

EncoderConfig EncoderConfig::for_builder(const BuilderConfig& b) {
    EncoderConfig c;
    c.obstacle_in = b.obstacle_feature_dim();
    c.road_in = b.road_feature_dim();
    return c;
}

void EncoderConfig::validate() const {
    if (obstacle_in <= 0 || road_in <= 0 || embedding_dim <= 0) throw ValidationError("encoder dims must be positive");
    for (int d : obstacle_hidden) {
        if (d <= 0) throw ValidationError("encoder hidden dims must be positive");
    }
    for (int d : road_hidden) {
        if (d <= 0) throw ValidationError("encoder hidden dims must be positive");
    }
}

HeteroEncoder::HeteroEncoder(const EncoderConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    int o_in = config.obstacle_in;
    int r_in = config.road_in;
    for (int l = 0; l < kNumLayers; ++l) {
        const auto tag = std::to_string(l);
        const int o_out = config.obstacle_hidden[static_cast<std::size_t>(l)];
        const int r_out = config.road_hidden[static_cast<std::size_t>(l)];
        o2o_[l] = EdgeSageLayer("enc.o2o." + tag, o_in, o_in, kO2OFeatureDim, o_out, rng);
        temporal_[l] = EdgeSageLayer("enc.temporal." + tag, o_in, o_in, kTemporalFeatureDim, o_out, rng);
        r2o_[l] = EdgeSageLayer("enc.r2o." + tag, o_in, r_in, kO2RFeatureDim, o_out, rng);
        r2r_[l] = EdgeSageLayer("enc.r2r." + tag, r_in, r_in, kR2RFeatureDim, r_out, rng);
        bn_obstacle_[l] = nn::BatchNorm("enc.bn_obstacle." + tag, o_out, config.bn_momentum, config.bn_eps);
        bn_road_[l] = nn::BatchNorm("enc.bn_road." + tag, r_out, config.bn_momentum, config.bn_eps);
        o_in = o_out;
        r_in = r_out;
    }
    pool_ = nn::Linear("enc.pool", 3 * o_in, config.embedding_dim, rng);
}

Mat HeteroEncoder::forward(const GraphBatch& batch, BnMode mode, Tape* tape) const {
    if (batch.obstacle_x.cols() != config_.obstacle_in || batch.road_x.cols() != config_.road_in) {
        throw ShapeError("graph feature widths do not match the encoder (obstacle " +
                         std::to_string(batch.obstacle_x.cols()) + ", road " + std::to_string(batch.road_x.cols()) +
                         ")");
    }
    Mat obs = batch.obstacle_x;
    Mat road = batch.road_x;
    for (int l = 0; l < kNumLayers; ++l) {
        LayerTape local;
        LayerTape& lt = tape != nullptr ? tape->layers[l] : local;
        const bool last = l == kNumLayers - 1;

        // The three obstacle relations share their target input, so the self
        // terms collapse into one product.
        check_shapes(o2o_[l], obs, obs, batch.o2o);
        check_shapes(temporal_[l], obs, obs, batch.temporal);
        check_shapes(r2o_[l], obs, road, batch.r2o);
        const Mat w_self = o2o_[l].w_self.value + temporal_[l].w_self.value + r2o_[l].w_self.value;
        Mat pre = obs * w_self.transpose();
        lt.agg_o2o = edge_sage_aggregate(o2o_[l], obs, batch.o2o);
        lt.agg_temporal = edge_sage_aggregate(temporal_[l], obs, batch.temporal);
        lt.agg_r2o = edge_sage_aggregate(r2o_[l], road, batch.r2o);
        pre.noalias() += lt.agg_o2o * o2o_[l].w_neigh.value.transpose();
        pre.noalias() += lt.agg_temporal * temporal_[l].w_neigh.value.transpose();
        pre.noalias() += lt.agg_r2o * r2o_[l].w_neigh.value.transpose();
        pre.rowwise() += o2o_[l].bias.value.row(0) + temporal_[l].bias.value.row(0) + r2o_[l].bias.value.row(0);
        pre *= 1.0 / 3.0;
        Mat obs_next = bn_obstacle_[l].forward(pre, mode, &lt.bn_obstacle);
        if (!last) obs_next = nn::relu(obs_next);

        Mat road_pre = edge_sage_forward(r2r_[l], road, road, batch.r2r, &lt.agg_r2r);
        Mat road_next = bn_road_[l].forward(road_pre, mode, &lt.bn_road);
        if (!last) road_next = nn::relu(road_next);

        if (tape != nullptr) {
            lt.obstacle_in = std::move(obs);
            lt.road_in = std::move(road);
            lt.obstacle_out = obs_next;
            lt.road_out = road_next;
        }
        obs = std::move(obs_next);
        road = std::move(road_next);
    }

    const auto n_graphs = static_cast<Eigen::Index>(batch.num_graphs());
    const Eigen::Index d = obs.cols();
    Mat pooled(n_graphs, 3 * d);
    std::vector<Eigen::Index> argmin(static_cast<std::size_t>(n_graphs * d));
    std::vector<Eigen::Index> argmax(argmin.size());
    for (Eigen::Index b = 0; b < n_graphs; ++b) {
        const auto begin = static_cast<Eigen::Index>(batch.obstacle_offsets[static_cast<std::size_t>(b)]);
        const auto end = static_cast<Eigen::Index>(batch.obstacle_offsets[static_cast<std::size_t>(b) + 1]);
        if (end <= begin) throw ValidationError("graph without obstacle nodes");
        for (Eigen::Index c = 0; c < d; ++c) {
            Eigen::Index lo = begin;
            Eigen::Index hi = begin;
            double sum = 0.0;
            for (Eigen::Index r = begin; r < end; ++r) {
                const double v = obs(r, c);
                if (v < obs(lo, c)) lo = r;
                if (v > obs(hi, c)) hi = r;
                sum += v;
            }
            pooled(b, c) = obs(lo, c);
            pooled(b, d + c) = obs(hi, c);
            pooled(b, 2 * d + c) = sum / static_cast<double>(end - begin);
            argmin[static_cast<std::size_t>(b * d + c)] = lo;
            argmax[static_cast<std::size_t>(b * d + c)] = hi;
        }
    }
    Mat z = pool_.forward(pooled);
    if (tape != nullptr) {
        tape->node_embeddings = std::move(obs);
        tape->argmin = std::move(argmin);
        tape->argmax = std::move(argmax);
        tape->pooled = std::move(pooled);
        tape->offsets = batch.obstacle_offsets;
    }
    return z;
}

RowVec HeteroEncoder::encode(const HeteroGraph& g) const {
    return forward(GraphBatch::build(g), BnMode::eval).row(0);
}

void HeteroEncoder::backward(const Tape& tape, const GraphBatch& batch, const Mat& d_embeddings, Mat* d_obstacle_x,
                             Mat* d_road_x) {
    const Mat d_pooled = pool_.backward(tape.pooled, d_embeddings);
    const Mat& emb = tape.node_embeddings;
    const Eigen::Index d = emb.cols();
    Mat d_obs = Mat::Zero(emb.rows(), d);
    const auto n_graphs = static_cast<Eigen::Index>(tape.offsets.size() - 1);
    for (Eigen::Index b = 0; b < n_graphs; ++b) {
        const auto begin = static_cast<Eigen::Index>(tape.offsets[static_cast<std::size_t>(b)]);
        const auto end = static_cast<Eigen::Index>(tape.offsets[static_cast<std::size_t>(b) + 1]);
        const double inv_n = 1.0 / static_cast<double>(end - begin);
        for (Eigen::Index c = 0; c < d; ++c) {
            d_obs(tape.argmin[static_cast<std::size_t>(b * d + c)], c) += d_pooled(b, c);
            d_obs(tape.argmax[static_cast<std::size_t>(b * d + c)], c) += d_pooled(b, d + c);
        }
        d_obs.middleRows(begin, end - begin).rowwise() += inv_n * d_pooled.row(b).segment(2 * d, d);
    }

    // Gradient w.r.t. the road output of the current layer; the last road
    // layer feeds nothing.
    Mat d_road = Mat::Zero(tape.layers[kNumLayers - 1].road_out.rows(), tape.layers[kNumLayers - 1].road_out.cols());
    for (int l = kNumLayers - 1; l >= 0; --l) {
        const LayerTape& lt = tape.layers[l];
        const bool last = l == kNumLayers - 1;

        Mat g = last ? d_obs : nn::relu_backward(lt.obstacle_out, d_obs);
        g = bn_obstacle_[l].backward(lt.bn_obstacle, g);
        g *= 1.0 / 3.0;
        const Mat dw_self = g.transpose() * lt.obstacle_in;
        o2o_[l].w_self.grad += dw_self;
        temporal_[l].w_self.grad += dw_self;
        r2o_[l].w_self.grad += dw_self;
        const Mat w_self = o2o_[l].w_self.value + temporal_[l].w_self.value + r2o_[l].w_self.value;
        Mat d_obs_in = g * w_self;
        Mat d_road_in = Mat::Zero(lt.road_in.rows(), lt.road_in.cols());
        neighbor_backward(o2o_[l], lt.agg_o2o, batch.o2o, g, &d_obs_in);
        neighbor_backward(temporal_[l], lt.agg_temporal, batch.temporal, g, &d_obs_in);
        neighbor_backward(r2o_[l], lt.agg_r2o, batch.r2o, g, &d_road_in);

        if (!last) {
            Mat gr = nn::relu_backward(lt.road_out, d_road);
            gr = bn_road_[l].backward(lt.bn_road, gr);
            edge_sage_backward(r2r_[l], lt.road_in, lt.agg_r2r, batch.r2r, gr, &d_road_in, &d_road_in);
        }
        d_obs = std::move(d_obs_in);
        d_road = std::move(d_road_in);
    }
    if (d_obstacle_x != nullptr) *d_obstacle_x = d_obs;
    if (d_road_x != nullptr) *d_road_x = d_road;
}

void HeteroEncoder::update_running_stats(const Tape& tape) {
    for (int l = 0; l < kNumLayers; ++l) {
        bn_obstacle_[l].update_running(tape.layers[l].bn_obstacle);
        bn_road_[l].update_running(tape.layers[l].bn_road);
    }
}

std::vector<Param*> HeteroEncoder::parameters() {
    std::vector<Param*> out;
    for (int l = 0; l < kNumLayers; ++l) {
        o2o_[l].collect(out);
        temporal_[l].collect(out);
        r2o_[l].collect(out);
        r2r_[l].collect(out);
        bn_obstacle_[l].collect(out);
        bn_road_[l].collect(out);
    }
    pool_.collect(out);
    return out;
}

std::vector<Param*> HeteroEncoder::buffers() {
    std::vector<Param*> out;
    for (int l = 0; l < kNumLayers; ++l) {
        bn_obstacle_[l].collect_buffers(out);
        bn_road_[l].collect_buffers(out);
    }
    return out;
}

std::vector<Param*> HeteroEncoder::state() {
    auto out = parameters();
    const auto b = buffers();
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

nn::Mlp make_predictor(const std::string& name, int in, int out, Rng& rng, int hidden) {
    return nn::Mlp(name, in, hidden, out, rng);
}

Mat normalize_rows(const Mat& z) {
    Mat out(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double n = z.row(i).norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("zero-norm or non-finite embedding");
        out.row(i) = z.row(i) / n;
    }
    return out;
}

}  // namespace tsg
