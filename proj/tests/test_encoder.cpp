#include "tsg/encoder.hpp"
#include "tsg/ssl.hpp"
#include "tsg/synthetic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>


using namespace tsg;
using fixture::grad_check;
using fixture::random_mat;

namespace {

HeteroGraph duplicate_nodes(const HeteroGraph& g) {
    HeteroGraph h = g;
    const auto no = static_cast<std::uint32_t>(g.num_obstacle_nodes());
    const auto nr = static_cast<std::uint32_t>(g.num_road_nodes());
    h.obstacle_x = Mat(2 * no, g.obstacle_x.cols());
    h.obstacle_x << g.obstacle_x, g.obstacle_x;
    h.road_x = Mat(2 * nr, g.road_x.cols());
    h.road_x << g.road_x, g.road_x;
    h.obstacle_ids.insert(h.obstacle_ids.end(), g.obstacle_ids.begin(), g.obstacle_ids.end());
    h.obstacle_t.insert(h.obstacle_t.end(), g.obstacle_t.begin(), g.obstacle_t.end());
    h.segment_ids.insert(h.segment_ids.end(), g.segment_ids.begin(), g.segment_ids.end());
    auto dup = [](EdgeTable& t, const EdgeTable& o, std::uint32_t so, std::uint32_t to) {
        for (std::size_t k = 0; k < o.size(); ++k) {
            t.src.push_back(o.src[k] + so);
            t.dst.push_back(o.dst[k] + to);
            t.subtype.push_back(o.subtype[k]);
        }
        Mat f(2 * o.features.rows(), o.features.cols());
        f << o.features, o.features;
        t.features = f;
    };
    dup(h.o2o, g.o2o, no, no);
    dup(h.temporal, g.temporal, no, no);
    dup(h.o2r, g.o2r, no, nr);
    dup(h.r2r, g.r2r, nr, nr);
    return h;
}

}  // namespace

TEST(EdgeSage, IdentityWeights) {
    Rng rng(1);
    EdgeSageLayer l("l", 2, 2, 1, 2, rng);
    l.w_self.value = Mat::Identity(2, 2);
    l.w_neigh.value = Mat::Identity(2, 2);
    l.w_edge.value.setZero();
    l.bias.value.setZero();
    Mat xt(1, 2), xs(1, 2), e(1, 1);
    xt << 1, 0;
    xs << 0, 1;
    e << 3;
    const Mat out = edge_sage_forward(l, xt, xs, {0}, {0}, e);
    EXPECT_EQ(out(0, 0), 1.0);
    EXPECT_EQ(out(0, 1), 1.0);
}

TEST(EdgeSage, IsolatedTargetKeepsSelfTerm) {
    Rng rng(2);
    EdgeSageLayer l("l", 3, 3, 2, 3, rng);
    l.w_self.value = Mat::Identity(3, 3);
    l.bias.value.setZero();
    const Mat xt = random_mat(2, 3, rng);
    const Mat xs = random_mat(2, 3, rng);
    Mat e = random_mat(1, 2, rng);
    const Mat out = edge_sage_forward(l, xt, xs, {1}, {0}, e);
    EXPECT_EQ(out.row(1), xt.row(1));
}

TEST(EdgeSage, MatchesNaiveLoopOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int dt = 2 + static_cast<int>(rng() % 5), ds = 2 + static_cast<int>(rng() % 5);
        const int de = 1 + static_cast<int>(rng() % 4), dout = 1 + static_cast<int>(rng() % 6);
        const int nt = 1 + static_cast<int>(rng() % 6), ns = 1 + static_cast<int>(rng() % 6);
        EdgeSageLayer l("l", dt, ds, de, dout, rng);
        l.bias.value = random_mat(1, dout, rng);
        const auto c = fixture::random_sage_case(rng, nt, ns, dt, ds, de, 12);
        const Mat fast = edge_sage_forward(l, c.x_target, c.x_source, c.src, c.dst, c.edge);
        const Mat slow = fixture::naive_edge_sage(l.w_self.value, l.w_neigh.value, l.w_edge.value, l.bias.value,
                                                  c.x_target, c.x_source, c.src, c.dst, c.edge);
        EXPECT_LE((fast - slow).norm(), 1e-6 * std::max(1.0, slow.norm()));
    }
}

TEST(EdgeSage, ShapeMismatch) {
    Rng rng(4);
    EdgeSageLayer l("l", 3, 3, 2, 3, rng);
    EXPECT_THROW(edge_sage_forward(l, Mat::Zero(2, 4), Mat::Zero(2, 3), {0}, {1}, Mat::Zero(1, 2)), ShapeError);
    EXPECT_THROW(edge_sage_forward(l, Mat::Zero(2, 3), Mat::Zero(2, 3), {0}, {5}, Mat::Zero(1, 2)), ShapeError);
}

TEST(EdgeSage, GradientsMatchFiniteDifferences) {
    Rng rng(5);
    EdgeSageLayer l("l", 3, 4, 2, 3, rng);
    l.bias.value = random_mat(1, 3, rng);
    auto c = fixture::random_sage_case(rng, 4, 3, 3, 4, 2, 8);
    c.src.push_back(0);
    c.dst.push_back(0);
    c.edge.conservativeResize(c.edge.rows() + 1, 2);
    c.edge.row(c.edge.rows() - 1) = random_mat(1, 2, rng);
    const Mat w = random_mat(4, 3, rng);  // loss = sum(w .* out)
    auto loss = [&] {
        const auto nb = Neighborhood::build(c.src, c.dst, c.edge, 3, 4);
        return (edge_sage_forward(l, c.x_target, c.x_source, nb).array() * w.array()).sum();
    };
    const auto nb = Neighborhood::build(c.src, c.dst, c.edge, 3, 4);
    Mat agg;
    edge_sage_forward(l, c.x_target, c.x_source, nb, &agg);
    std::vector<nn::Param*> ps;
    l.collect(ps);
    nn::zero_grads(ps);
    Mat dt = Mat::Zero(4, 3), ds = Mat::Zero(3, 4);
    edge_sage_backward(l, c.x_target, agg, nb, w, &dt, &ds);
    for (auto* p : ps) EXPECT_LT(grad_check(p->value, p->grad, loss), 1e-4) << p->name;
    EXPECT_LT(grad_check(c.x_target, dt, loss), 1e-4);
    EXPECT_LT(grad_check(c.x_source, ds, loss), 1e-4);
}

TEST(BatchNorm, TrainModeGradient) {
    Rng rng(6);
    nn::BatchNorm bn("bn", 4);
    bn.gamma.value = random_mat(1, 4, rng);
    bn.beta.value = random_mat(1, 4, rng);
    Mat x = random_mat(7, 4, rng);
    const Mat w = random_mat(7, 4, rng);
    auto loss = [&] { return (bn.forward(x, nn::BnMode::train, nullptr).array() * w.array()).sum(); };
    nn::BatchNorm::Tape tape;
    bn.forward(x, nn::BnMode::train, &tape);
    bn.gamma.grad.setZero();
    bn.beta.grad.setZero();
    const Mat dx = bn.backward(tape, w);
    EXPECT_LT(grad_check(x, dx, loss), 1e-4);
    EXPECT_LT(grad_check(bn.gamma.value, bn.gamma.grad, loss), 1e-4);
    EXPECT_LT(grad_check(bn.beta.value, bn.beta.grad, loss), 1e-4);
}

TEST(BatchNorm, EvalModeGradientAndRunningStats) {
    Rng rng(7);
    nn::BatchNorm bn("bn", 3, 0.1, 1e-5);
    Mat x = random_mat(5, 3, rng);
    nn::BatchNorm::Tape tape;
    bn.forward(x, nn::BnMode::train, &tape);
    bn.update_running(tape);
    const RowVec mean = x.colwise().mean();
    const RowVec var = (x.rowwise() - mean).array().square().colwise().sum() / 4.0;
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(bn.running_mean.value(0, c), 0.1 * mean(c), 1e-14);
        EXPECT_NEAR(bn.running_var.value(0, c), 0.9 + 0.1 * var(c), 1e-14);
    }
    const Mat w = random_mat(5, 3, rng);
    auto loss = [&] { return (bn.forward(x, nn::BnMode::eval, nullptr).array() * w.array()).sum(); };
    bn.forward(x, nn::BnMode::eval, &tape);
    const Mat dx = bn.backward(tape, w);
    EXPECT_LT(grad_check(x, dx, loss), 1e-4);
}

TEST(Predictor, ZeroWeightsGiveZero) {
    Rng rng(8);
    auto p = make_predictor("p", 128, 128, rng);
    p.first.weight.value.setZero();
    p.first.bias.value.setZero();
    p.second.weight.value.setZero();
    p.second.bias.value.setZero();
    EXPECT_TRUE(p.forward(random_mat(3, 128, rng)).isZero(0.0));
}

TEST(Predictor, UnitSlopeIsAffineComposition) {
    Rng rng(9);
    auto p = make_predictor("p", 6, 5, rng, 8);
    p.first.bias.value = random_mat(1, 8, rng);
    p.second.bias.value = random_mat(1, 5, rng);
    p.act.slope.value(0, 0) = 1.0;
    const Mat x = random_mat(4, 6, rng);
    const Mat w = p.second.weight.value * p.first.weight.value;
    const RowVec b = p.first.bias.value * p.second.weight.value.transpose() + p.second.bias.value;
    const Mat expected = (x * w.transpose()).rowwise() + b;
    EXPECT_LT((p.forward(x) - expected).norm(), 1e-12);
}

TEST(Predictor, GradientsMatchFiniteDifferences) {
    Rng rng(10);
    auto p = make_predictor("p", 6, 5, rng, 16);
    p.act.slope.value(0, 0) = 0.3;
    Mat x = random_mat(4, 6, rng);
    const Mat w = random_mat(4, 5, rng);
    auto loss = [&] { return (p.forward(x).array() * w.array()).sum(); };
    nn::Mlp::Tape tape;
    p.forward(x, &tape);
    std::vector<nn::Param*> ps;
    p.collect(ps);
    nn::zero_grads(ps);
    const Mat dx = p.backward(tape, w);
    for (auto* q : ps) EXPECT_LT(grad_check(q->value, q->grad, loss), 1e-4) << q->name;
    EXPECT_LT(grad_check(x, dx, loss), 1e-4);
}

TEST(Encoder, FullChainGradientCheck) {
    const auto g = build_graph(fixture::five_node_scenario(), BuilderConfig{});
    ASSERT_EQ(g.num_obstacle_nodes(), 5u);
    ASSERT_GE(g.num_road_nodes(), 3u);
    Rng rng(11);
    HeteroEncoder enc(EncoderConfig{}, rng);
    auto pred = make_predictor("pred", 128, 128, rng);
    HeteroGraph g2 = g;
    g2.obstacle_x += 0.1 * random_mat(g.obstacle_x.rows(), g.obstacle_x.cols(), rng);
    const auto b1 = GraphBatch::build(g);
    const auto b2 = GraphBatch::build(g2);
    const Mat t1 = random_mat(1, 128, rng);
    const Mat t2 = random_mat(1, 128, rng);

    auto loss = [&] {
        const Mat p1 = pred.forward(enc.forward(b1, nn::BnMode::train));
        const Mat p2 = pred.forward(enc.forward(b2, nn::BnMode::train));
        return bgrl_loss(p1, p2, t1, t2).loss;
    };

    auto params = enc.parameters();
    pred.collect(params);
    nn::zero_grads(params);
    HeteroEncoder::Tape e1, e2;
    nn::Mlp::Tape m1, m2;
    const Mat p1 = pred.forward(enc.forward(b1, nn::BnMode::train, &e1), &m1);
    const Mat p2 = pred.forward(enc.forward(b2, nn::BnMode::train, &e2), &m2);
    const auto lg = bgrl_loss(p1, p2, t1, t2);
    enc.backward(e1, b1, pred.backward(m1, lg.d_first));
    enc.backward(e2, b2, pred.backward(m2, lg.d_second));

    // Every tensor, up to 24 sampled entries each.
    double worst = 0.0;
    for (auto* p : params) {
        std::vector<Eigen::Index> entries;
        const Eigen::Index n = p->value.size();
        for (Eigen::Index s = 0; s < std::min<Eigen::Index>(n, 24); ++s) {
            entries.push_back(n <= 24 ? s : static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
        }
        const double w = fixture::grad_check_entries(p->value, p->grad, entries, loss);
        EXPECT_LT(w, 1e-4) << p->name;
        worst = std::max(worst, w);
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Encoder, EmptyObstacleSetRejected) {
    HeteroGraph g;
    g.scenario_id = "none";
    g.obstacle_x = Mat::Zero(0, 31);
    g.road_x = Mat::Zero(0, 33);
    EXPECT_THROW(GraphBatch::build(g), ValidationError);
}

TEST(Encoder, SingleObstacleNodePoolsEqual) {
    Scenario s = fixture::two_car_scenario(1);
    s.obstacles.pop_back();
    const auto g = build_graph(s, BuilderConfig{});
    Rng rng(12);
    HeteroEncoder enc(EncoderConfig{}, rng);
    HeteroEncoder::Tape tape;
    enc.forward(GraphBatch::build(g), nn::BnMode::eval, &tape);
    const Eigen::Index d = 128;
    EXPECT_EQ(tape.pooled.leftCols(d), tape.pooled.middleCols(d, d));
    EXPECT_EQ(tape.pooled.leftCols(d), tape.pooled.rightCols(d));
}

TEST(Encoder, NodePermutationInvariant) {
    Rng rng(13);
    HeteroEncoder enc(EncoderConfig{}, rng);
    for (const auto& s : generate_all_families(2, 14)) {
        const auto g = build_graph(s, BuilderConfig{});
        const auto h = fixture::permute_obstacles(g, fixture::random_permutation(g.num_obstacle_nodes(), rng));
        const RowVec a = enc.encode(g);
        const RowVec b = enc.encode(h);
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
}

TEST(Encoder, DuplicatedNodeSetSameEmbedding) {
    Rng rng(15);
    HeteroEncoder enc(EncoderConfig{}, rng);
    const auto g = build_graph(generate_synthetic("overtake", 1, 16)[0], BuilderConfig{});
    const RowVec a = enc.encode(g);
    const RowVec b = enc.encode(duplicate_nodes(g));
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Encoder, BatchingMatchesSingleGraphsInEvalMode) {
    Rng rng(17);
    HeteroEncoder enc(EncoderConfig{}, rng);
    std::vector<HeteroGraph> graphs;
    for (const auto& s : generate_all_families(1, 18)) graphs.push_back(build_graph(s, BuilderConfig{}));
    std::vector<const HeteroGraph*> ptrs;
    for (const auto& g : graphs) ptrs.push_back(&g);
    const Mat z = enc.forward(GraphBatch::build(ptrs), nn::BnMode::eval);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        EXPECT_LT((z.row(static_cast<Eigen::Index>(i)) - enc.encode(graphs[i])).norm(), 1e-10);
    }
}

TEST(Encoder, ParameterNamesUnique) {
    Rng rng(19);
    HeteroEncoder enc(EncoderConfig{}, rng);
    std::set<std::string> names;
    for (auto* p : enc.state()) EXPECT_TRUE(names.insert(p->name).second) << p->name;
    EXPECT_EQ(enc.state().size(), enc.parameters().size() + enc.buffers().size());
}

TEST(Encoder, WrongFeatureWidthRejected) {
    Rng rng(20);
    BuilderConfig b;
    b.pe_dim = 8;
    HeteroEncoder enc(EncoderConfig{}, rng);
    const auto g = build_graph(fixture::two_car_scenario(), b);
    EXPECT_THROW(enc.encode(g), ShapeError);
    EXPECT_EQ(EncoderConfig::for_builder(b).obstacle_in, 23);
}

TEST(Encoder, NormalizeRowsRejectsZero) {
    Mat z = Mat::Ones(2, 3);
    z.row(1).setZero();
    EXPECT_THROW(normalize_rows(z), ValidationError);
    EXPECT_NEAR(normalize_rows(Mat::Ones(1, 4)).norm(), 1.0, 1e-15);
}
