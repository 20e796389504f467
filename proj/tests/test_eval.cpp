#include "tsg/checkpoint.hpp"
#include "tsg/classifier.hpp"
#include "tsg/embedding_set.hpp"
#include "tsg/embedding_store.hpp"
#include "tsg/evaluation.hpp"
#include "tsg/projection.hpp"
#include "tsg/synthetic.hpp"
#include "tsg/validity.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace tsg;
using fixture::random_mat;

namespace fs = std::filesystem;

namespace {

EmbeddingSet random_store(std::size_t n, int dim, Rng& rng) {
    EmbeddingSet s;
    s.vectors = normalize_rows(random_mat(static_cast<Eigen::Index>(n), dim, rng));
    for (std::size_t i = 0; i < n; ++i) s.ids.push_back("s" + std::to_string(1000 + i));
    return s;
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

std::vector<HeteroGraph> family_graphs(int per_family, std::uint64_t seed) {
    std::vector<HeteroGraph> out;
    for (const auto& s : generate_all_families(per_family, seed)) out.push_back(build_graph(s, BuilderConfig{}));
    return out;
}

}  // namespace

TEST(CosineDistance, Basics) {
    RowVec a(3), b(3);
    a << 1, 0, 0;
    b << 0, 2, 0;
    EXPECT_EQ(cosine_distance(a, a), 0.0);
    EXPECT_NEAR(cosine_distance(a, b), 1.0, 1e-15);
    EXPECT_NEAR(cosine_distance(a, -a), 2.0, 1e-15);
}

TEST(Knn, MatchesBruteForce) {
    Rng rng(1);
    const auto store = random_store(200, 16, rng);
    for (int q = 0; q < 20; ++q) {
        const RowVec query = random_mat(1, 16, rng);
        std::vector<Neighbor> all;
        for (std::size_t i = 0; i < store.size(); ++i) {
            const RowVec v = store.vectors.row(static_cast<Eigen::Index>(i));
            const double d = 1.0 - v.dot(query) / (v.norm() * query.norm());
            all.push_back({store.ids[i], std::max(0.0, d)});
        }
        std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
            return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
        });
        const auto got = knn_query(store, query, 10);
        ASSERT_EQ(got.size(), 10u);
        for (std::size_t k = 0; k < 10; ++k) {
            EXPECT_EQ(got[k].id, all[k].id);
            EXPECT_NEAR(got[k].distance, all[k].distance, 1e-12);
        }
    }
}

TEST(Knn, SelfFirstAndFullRanking) {
    Rng rng(2);
    const auto store = random_store(30, 8, rng);
    const auto hits = knn_query(store, store.vectors.row(7), store.size());
    EXPECT_EQ(hits[0].id, store.ids[7]);
    EXPECT_EQ(hits[0].distance, 0.0);
    std::set<std::string> ids;
    for (const auto& h : hits) ids.insert(h.id);
    EXPECT_EQ(ids.size(), store.size());
    for (std::size_t k = 1; k < hits.size(); ++k) EXPECT_LE(hits[k - 1].distance, hits[k].distance);
}

TEST(Knn, RowPermutationInvariantAndTiesById) {
    Rng rng(3);
    auto store = random_store(40, 8, rng);
    store.vectors.row(5) = store.vectors.row(9);  // exact tie
    const RowVec query = store.vectors.row(9);
    const auto before = knn_query(store, query, 5);
    EXPECT_EQ(before[0].id, store.ids[5]);
    EXPECT_EQ(before[1].id, store.ids[9]);
    std::vector<std::size_t> rows(store.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = rows.size() - 1 - i;
    EXPECT_EQ(knn_query(store.subset(rows), query, 5), before);
}

TEST(Knn, Errors) {
    EmbeddingSet empty;
    empty.vectors = Mat(0, 4);
    EXPECT_THROW(knn_query(empty, RowVec::Ones(4), 1), ValidationError);
    Rng rng(4);
    const auto store = random_store(5, 4, rng);
    EXPECT_THROW(knn_query(store, RowVec::Ones(4), 0), ValidationError);
    EXPECT_THROW(knn_query(store, RowVec::Ones(4), 6), ValidationError);
    EXPECT_THROW(knn_query(store, RowVec::Ones(3), 1), ShapeError);
}

TEST(EmbeddingSet, Validation) {
    Rng rng(5);
    auto s = random_store(4, 4, rng);
    EXPECT_NO_THROW(s.validate());
    s.ids[1] = s.ids[0];
    EXPECT_THROW(s.validate(), ValidationError);
    s = random_store(4, 4, rng);
    s.vectors(0, 0) += 0.1;
    EXPECT_THROW(s.validate(), ValidationError);
}

TEST(EmbeddingStore, BitExactRoundTrip) {
    Rng rng(6);
    auto s = random_store(25, 128, rng);
    // Store is float32; round first so the comparison is exact.
    s.vectors = s.vectors.cast<float>().cast<double>();
    const auto dir = fresh_dir("tsg_store_test");
    write_embedding_store(dir, s, {"bgrl", "0123456789abcdef"});
    EXPECT_EQ(fs::file_size(dir / "embeddings.f32"), 25u * 128u * 4u);
    StoreInfo info;
    const auto r = read_embedding_store(dir, &info);
    EXPECT_EQ(r.ids, s.ids);
    EXPECT_EQ(r.vectors, s.vectors);
    EXPECT_EQ(info.model_kind, "bgrl");
    EXPECT_EQ(info.checkpoint_hash, "0123456789abcdef");

    fs::resize_file(dir / "embeddings.f32", 100);
    try {
        read_embedding_store(dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "format_error");
    }
    fs::remove_all(dir);
    EXPECT_THROW(read_embedding_store(dir), Error);
}

TEST(Checkpoint, RoundTripBothKinds) {
    const auto dir = fresh_dir("tsg_ckpt_test");
    fs::create_directories(dir);
    for (ModelKind kind : {ModelKind::bgrl, ModelKind::graphcl}) {
        TrainConfig tc;
        tc.seed = 3;
        Model m = Model::create(kind, BuilderConfig{}, tc, default_label_vocabulary());
        m.online.buffers()[0]->value.setConstant(0.25);
        const auto path = dir / (std::string(to_string(kind)) + ".ckpt");
        save_checkpoint(path, m);
        Model r = load_checkpoint(path);
        EXPECT_EQ(r.kind, kind);
        EXPECT_EQ(r.builder, m.builder);
        EXPECT_EQ(r.encoder_config, m.encoder_config);
        EXPECT_EQ(r.train, m.train);
        EXPECT_EQ(r.vocab, m.vocab);
        const auto a = m.tensors();
        const auto b = r.tensors();
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].first, b[i].first);
            EXPECT_EQ(a[i].second->value, b[i].second->value) << a[i].first;
        }
        EXPECT_EQ(checkpoint_hash(path).size(), 16u);
    }
    std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
    try {
        load_checkpoint(dir / "junk.ckpt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "format_error");
    }
    EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), Error);
    fs::remove_all(dir);
}

TEST(Classifier, MemorizesSingleSample) {
    Rng rng(7);
    const Mat x = normalize_rows(random_mat(1, 128, rng));
    ClassifierConfig c;
    c.epochs = 300;
    LabelClassifier clf(128, default_label_vocabulary(), c);
    const std::vector<LabelSet> y{{"stationary", "changing_lane"}};
    clf.fit(x, y);
    EXPECT_EQ(contain_accuracy(clf.predict(x), y), 1.0);
}

TEST(Classifier, LossDecreasesOverFirstEpochs) {
    Rng rng(8);
    const auto& vocab = default_label_vocabulary();
    Mat x(120, 16);
    std::vector<LabelSet> y;
    for (int i = 0; i < 120; ++i) {
        const int k = i % 3;
        x.row(i) = random_mat(1, 16, rng, 0.1);
        x(i, k) += 1.0;
        y.push_back({vocab[static_cast<std::size_t>(k)], vocab[9]});
    }
    ClassifierConfig c;
    c.epochs = 5;
    LabelClassifier clf(16, vocab, c);
    const auto h = clf.fit(x, y);
    ASSERT_EQ(h.size(), 5u);
    for (std::size_t e = 1; e < h.size(); ++e) EXPECT_LT(h[e], h[e - 1]);
}

TEST(Classifier, BceGradientAndErrors) {
    Rng rng(9);
    Mat logits = random_mat(4, 3, rng, 3.0);
    Mat t = Mat::Zero(4, 3);
    t(0, 1) = t(2, 0) = t(3, 2) = 1.0;
    Mat d;
    bce_with_logits(logits, t, &d);
    auto loss = [&] { return bce_with_logits(logits, t, nullptr); };
    EXPECT_LT(fixture::grad_check(logits, d, loss), 1e-4);
    Mat zero = Mat::Zero(1, 1), one = Mat::Ones(1, 1);
    EXPECT_NEAR(bce_with_logits(zero, one, nullptr), std::log(2.0), 1e-15);
    EXPECT_NEAR(bce_with_logits(Mat::Constant(1, 1, 800.0), one, nullptr), 0.0, 1e-15);
    EXPECT_THROW(LabelClassifier(4, {}, ClassifierConfig{}), ValidationError);
    EXPECT_THROW(label_matrix({{"unknown"}}, default_label_vocabulary()), ValidationError);
}

TEST(Classifier, ShuffledControlWorseOnSeparableData) {
    Rng rng(10);
    const auto& vocab = default_label_vocabulary();
    auto make = [&](int n) {
        EmbeddingSet s;
        Mat x(n, 12);
        std::vector<LabelSet> y;
        for (int i = 0; i < n; ++i) {
            const int k = i % 4;
            x.row(i) = random_mat(1, 12, rng, 0.2);
            x(i, k) += 1.0;
            y.push_back({vocab[static_cast<std::size_t>(2 * k)], vocab[static_cast<std::size_t>(2 * k + 1)]});
            s.ids.push_back("id" + std::to_string(i) + "_" + std::to_string(n));
        }
        s.vectors = normalize_rows(x);
        s.label_sets = y;
        return s;
    };
    const auto train = make(200);
    const auto test = make(60);
    ClassifierConfig c;
    c.epochs = 40;
    const auto r = evaluate_classifier(train, test, vocab, c);
    EXPECT_GE(r.contain_accuracy, 0.95);
    EXPECT_GE(r.auprc, 0.95);
    EXPECT_LE(r.shuffled_contain_accuracy, r.contain_accuracy - 0.25);
    EXPECT_EQ(r.majority_baseline, 0.0);
}

TEST(Validity, ConstantEncoderNeverValid) {
    const auto graphs = family_graphs(1, 1);
    const EmbedFn constant = [](const std::vector<HeteroGraph>& g) {
        return Mat::Ones(static_cast<Eigen::Index>(g.size()), 4).eval();
    };
    EXPECT_EQ(embedding_validity_rate(graphs, constant, AugmentConfig{}, 200, 3), 0.0);
    AugmentConfig identity;
    identity.resample_p = false;
    identity.p_edge_drop = identity.p_attr_drop = identity.p_attr_noise = 0.0;
    EXPECT_EQ(embedding_validity_rate(graphs, constant, identity, 200, 3), 0.0);
}

TEST(Validity, IdentityAugmentationWithInjectiveEncoder) {
    const auto graphs = family_graphs(2, 2);
    Rng rng(11);
    HeteroEncoder enc(EncoderConfig{}, rng);
    AugmentConfig identity;
    identity.resample_p = false;
    identity.p_edge_drop = identity.p_attr_drop = identity.p_attr_noise = 0.0;
    EXPECT_EQ(embedding_validity_rate(graphs, enc, identity, 300, 4), 1.0);
}

TEST(Validity, DeterministicAndErrors) {
    const auto graphs = family_graphs(1, 3);
    Rng rng(12);
    HeteroEncoder enc(EncoderConfig{}, rng);
    const double a = embedding_validity_rate(graphs, enc, AugmentConfig{}, 100, 5);
    EXPECT_EQ(a, embedding_validity_rate(graphs, enc, AugmentConfig{}, 100, 5));
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_THROW(embedding_validity_rate({graphs[0]}, enc, AugmentConfig{}, 10, 5), ValidationError);
}

TEST(Projection, PcaRecoversDominantAxis) {
    Rng rng(13);
    Mat x = random_mat(200, 5, rng, 0.01);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double t = n(rng);
        x(i, 2) += t;
        x(i, 3) -= 0.5 * t;
    }
    const Mat p = pca_2d(x);
    ASSERT_EQ(p.cols(), 2);
    // First component carries almost all variance and matches the latent.
    const Mat c = x.rowwise() - x.colwise().mean();
    RowVec dir(5);
    dir << 0, 0, 1, -0.5, 0;
    dir.normalize();
    const Vec proj = c * dir.transpose();
    EXPECT_NEAR(std::abs(proj.dot(p.col(0))) / (proj.norm() * p.col(0).norm()), 1.0, 1e-3);
    // Loadings depend only on the covariance, so negating the data negates the scores.
    EXPECT_LT((pca_2d(-x) + p).cwiseAbs().maxCoeff(), 1e-9);

    const auto path = fs::temp_directory_path() / "tsg_scatter.svg";
    std::vector<int> a(200, 0);
    a[0] = -1;
    write_scatter_svg(path, p, a, "test");
    std::ifstream in(path);
    std::string head;
    std::getline(in, head);
    EXPECT_NE(head.find("<svg"), std::string::npos);
    fs::remove(path);
}

TEST(Evaluation, ClusterReportOnLabeledBlobs) {
    Rng rng(14);
    EmbeddingSet s;
    Mat x(90, 8);
    std::vector<LabelSet> y;
    const std::vector<std::string> labels{"a", "b", "c"};
    for (int i = 0; i < 90; ++i) {
        x.row(i) = random_mat(1, 8, rng, 0.02);
        x(i, i % 3) += 1.0;
        y.push_back({labels[static_cast<std::size_t>(i % 3)]});
        s.ids.push_back("g" + std::to_string(i));
    }
    s.vectors = normalize_rows(x);
    s.label_sets = y;
    const auto r = cluster_embeddings(s, 10);
    EXPECT_EQ(r.num_clusters, 3);
    ASSERT_TRUE(r.multilabel_acc.has_value());
    EXPECT_EQ(*r.multilabel_acc, 1.0);
    ASSERT_TRUE(r.silhouette.has_value());
    EXPECT_GT(*r.silhouette, 0.9);
    const auto j = to_json(r);
    EXPECT_EQ(j["assignment"].size(), 90u);
    EXPECT_EQ(j["silhouette_status"], "ok");
    EXPECT_FALSE(to_json(r, false).contains("assignment"));
}
