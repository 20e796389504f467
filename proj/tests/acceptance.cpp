// Acceptance run: one PASS/FAIL line per criterion. Criteria 4-7 train both
// model kinds at full size and take roughly twenty minutes on one core.

#include "tsg/commands.hpp"
#include "tsg/encoder.hpp"
#include "tsg/metrics.hpp"
#include "tsg/model.hpp"
#include "tsg/ssl.hpp"
#include "tsg/synthetic.hpp"
#include "tsg/trainer.hpp"

#include "test_util.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace tsg;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome edge_sage_oracle() {
    Rng rng(101);
    double worst = 0.0;
    double elapsed = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int dt = 2 + static_cast<int>(rng() % 6), ds = 2 + static_cast<int>(rng() % 6);
        const int de = 1 + static_cast<int>(rng() % 5), dout = 1 + static_cast<int>(rng() % 8);
        const int nt = 1 + static_cast<int>(rng() % 8), ns = 1 + static_cast<int>(rng() % 8);
        EdgeSageLayer l("l", dt, ds, de, dout, rng);
        l.bias.value = fixture::random_mat(1, dout, rng);
        const auto c = fixture::random_sage_case(rng, nt, ns, dt, ds, de, 20);
        const auto t0 = Clock::now();
        const Mat fast = edge_sage_forward(l, c.x_target, c.x_source, c.src, c.dst, c.edge);
        elapsed += seconds_since(t0);
        const Mat slow = fixture::naive_edge_sage(l.w_self.value, l.w_neigh.value, l.w_edge.value, l.bias.value,
                                                  c.x_target, c.x_source, c.src, c.dst, c.edge);
        for (Eigen::Index i = 0; i < slow.size(); ++i) {
            const double ref = slow.data()[i];
            worst = std::max(worst, std::abs(fast.data()[i] - ref) / std::max(std::abs(ref), 1e-12));
        }
    }
    return {worst <= 1e-6 && elapsed < 1.0, "max rel err " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome full_chain_gradient() {
    const auto g = build_graph(fixture::five_node_scenario(), BuilderConfig{});
    Rng rng(102);
    HeteroEncoder enc(EncoderConfig{}, rng);
    auto pred = make_predictor("pred", 128, 128, rng);
    HeteroGraph g2 = g;
    g2.obstacle_x += 0.1 * fixture::random_mat(g.obstacle_x.rows(), g.obstacle_x.cols(), rng);
    const auto b1 = GraphBatch::build(g);
    const auto b2 = GraphBatch::build(g2);
    const Mat t1 = fixture::random_mat(1, 128, rng);
    const Mat t2 = fixture::random_mat(1, 128, rng);
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

    double worst = 0.0;
    std::size_t checked = 0;
    for (auto* p : params) {
        std::vector<Eigen::Index> entries;
        const Eigen::Index n = p->value.size();
        for (Eigen::Index s = 0; s < std::min<Eigen::Index>(n, 32); ++s) {
            entries.push_back(n <= 32 ? s : static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
        }
        checked += entries.size();
        worst = std::max(worst, fixture::grad_check_entries(p->value, p->grad, entries, loss));
    }
    return {worst < 1e-4, "max rel err " + fmt(worst) + " over " + std::to_string(checked) + " entries in " +
                              std::to_string(params.size()) + " tensors"};
}

Scenario translated(Scenario s, double dx, double dy) {
    for (auto& o : s.obstacles) {
        for (auto& st : o.states) {
            st.x += dx;
            st.y += dy;
        }
    }
    for (auto& r : s.road_segments) {
        for (auto& p : r.centerline) {
            p.x += dx;
            p.y += dy;
        }
    }
    return s;
}

Outcome invariance() {
    Rng rng(103);
    HeteroEncoder enc(EncoderConfig{}, rng);
    const BuilderConfig bc;
    std::uniform_real_distribution<double> shift(-5000.0, 5000.0);
    double worst_perm = 0.0;
    double worst_shift = 0.0;
    auto scenarios = generate_all_families(9, 104);
    scenarios.resize(50);
    for (const auto& s : scenarios) {
        const auto g = build_graph(s, bc);
        const RowVec a = enc.encode(g);
        const auto h = fixture::permute_obstacles(g, fixture::random_permutation(g.num_obstacle_nodes(), rng));
        worst_perm = std::max(worst_perm, (enc.encode(h) - a).cwiseAbs().maxCoeff());
        const RowVec b = enc.encode(build_graph(translated(s, shift(rng), shift(rng)), bc));
        worst_shift = std::max(worst_shift, (b - a).cwiseAbs().maxCoeff());
    }
    return {worst_perm <= 1e-5 && worst_shift <= 1e-5,
            "50 scenarios, max |diff| permutation " + fmt(worst_perm) + ", translation " + fmt(worst_shift)};
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

Outcome metric_oracles() {
    std::vector<std::string> failed;
    auto check = [&](const std::string& what, double got, double want) {
        if (!near(got, want)) failed.push_back(what + " got " + fmt(got) + " want " + fmt(want));
    };

    check("contain superset", contain_accuracy({{"a", "b"}}, {{"a"}}), 1.0);
    check("contain subset", contain_accuracy({{"a"}}, {{"a", "b"}}), 0.0);
    check("contain all labels", contain_accuracy({{"a", "b", "c"}, {"a", "b", "c"}}, {{"a"}, {"b", "c"}}), 1.0);

    const std::vector<std::string> two{"l1", "l2"};
    Mat second(1, 2);
    second << 0.2, 0.9;
    check("auprc l1 ranked second", sample_auprc(second, {{"l1"}}, two), 0.5);
    Mat perfect(2, 2);
    perfect << 0.9, 0.1, 0.3, 0.8;
    check("auprc perfect", sample_auprc(perfect, {{"l1"}, {"l2"}}, two), 1.0);
    const std::vector<std::string> three{"a", "b", "c"};
    Mat split(1, 3);
    split << 0.9, 0.5, 0.1;
    check("auprc a,c of a>b>c", sample_auprc(split, {{"a", "c"}}, three), (1.0 + 2.0 / 3.0) / 2.0);

    std::vector<int> assign{0, 0, 1};
    std::vector<LabelSet> labels{{"l1"}, {"l1", "l2"}, {"l2"}};
    auto primary = primary_labels(assign, labels);
    if (primary[0] != "l1" || primary[1] != "l2") failed.push_back("primary labels");
    check("multilabel clean", multilabel_acc(assign, labels, primary), 1.0);
    assign.push_back(0);
    labels.push_back({"l3"});
    primary = primary_labels(assign, labels);
    check("multilabel with l3", multilabel_acc(assign, labels, primary), 0.75);

    Mat pts(4, 2);
    pts << 0, 0, 0, 1, 10, 10, 10, 11;
    const double s200 = std::sqrt(200.0), s221 = std::sqrt(221.0), s181 = std::sqrt(181.0);
    const double b00 = (s200 + s221) / 2.0, b01 = (s181 + s200) / 2.0;
    const double expected = ((1.0 - 1.0 / b00) + (1.0 - 1.0 / b01) + (1.0 - 1.0 / b01) + (1.0 - 1.0 / b00)) / 4.0;
    check("silhouette two pairs", silhouette_clustered(pts, {0, 0, 1, 1}), expected);

    // p = (0,0) sits at mean distance 2 from both clusters, so its term is 0.
    Mat eq(4, 2);
    eq << 0, 0, 0, 2, 0, -2, 2, 0;
    const double r2 = std::sqrt(2.0), r8 = std::sqrt(8.0);
    const double sq = 1.0 - 2.0 / (2.0 + r2);
    const double sr = (3.0 - r8) / 3.0;
    const double sw = ((1.0 + r2) - r8) / r8;
    check("silhouette equidistant", silhouette_clustered(eq, {0, 0, 1, 1}), (0.0 + sq + sr + sw) / 4.0);

    std::string detail = "10 hand-enumerated values and primary labels";
    for (const auto& f : failed) detail += "; " + f;
    return {failed.empty(), detail};
}

Outcome ema_and_schedule() {
    std::vector<std::string> failed;
    nn::Param t("t", 1, 2), o("o", 1, 2);
    t.value << 1.0, -2.0;
    o.value << 3.0, 5.0;
    ema_update({&t}, {&o}, 1.0);
    if (t.value(0, 0) != 1.0 || t.value(0, 1) != -2.0) failed.push_back("m=1 keeps target");
    ema_update({&t}, {&o}, 0.5);
    if (t.value(0, 0) != 2.0 || t.value(0, 1) != 1.5) failed.push_back("m=0.5 midpoint");
    ema_update({&t}, {&o}, 0.0);
    if (t.value != o.value) failed.push_back("m=0 copies online");

    if (momentum_schedule(0, 100, 0.99) != 0.99) failed.push_back("schedule start");
    if (momentum_schedule(100, 100, 0.99) != 1.0) failed.push_back("schedule end");
    if (std::abs(momentum_schedule(50, 100, 0.99) - 0.995) > 1e-15) failed.push_back("schedule midpoint");

    std::vector<HeteroGraph> graphs;
    for (const auto& s : generate_all_families(2, 105)) graphs.push_back(build_graph(s, BuilderConfig{}));
    TrainConfig tc;
    tc.epochs = 20;
    tc.batch_size = 4;
    tc.ema_interval = 10;
    Model m = Model::create(ModelKind::bgrl, BuilderConfig{}, tc, default_label_vocabulary());
    Trainer tr(m, graphs, AugmentConfig{});
    const auto target = m.target.parameters();
    const std::vector<std::size_t> batch{0, 3, 6, 9};
    int frozen_steps = 0;
    int ema_steps = 0;
    for (int s = 1; s <= 30; ++s) {
        std::vector<Mat> before;
        for (auto* p : target) before.push_back(p->value);
        tr.step(batch);
        const auto online = m.online.parameters();
        const double mom = momentum_schedule(s, tr.total_steps(), tc.m_base);
        for (std::size_t i = 0; i < target.size(); ++i) {
            const Mat expected = s % 10 == 0 ? Mat(mom * before[i] + (1.0 - mom) * online[i]->value) : before[i];
            if (target[i]->value != expected) {
                failed.push_back("target at step " + std::to_string(s) + " " + target[i]->name);
                break;
            }
        }
        (s % 10 == 0 ? ema_steps : frozen_steps) += 1;
    }
    std::string detail = std::to_string(frozen_steps) + " frozen steps and " + std::to_string(ema_steps) +
                         " EMA steps checked bit-exactly";
    for (const auto& f : failed) detail += "; " + f;
    return {failed.empty(), detail};
}

PipelineConfig base_config(const fs::path& root) {
    auto c = load_pipeline_config(std::nullopt, {});
    c.paths.root = root;
    c.seed = 2024;
    c.propagate_seed();
    return c;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism(const fs::path& work) {
    std::vector<std::string> differing;
    std::map<std::string, std::string> first;
    for (const std::string run : {"det_a", "det_b"}) {
        fs::remove_all(work / run);
        fs::create_directories(work / run);
        auto c = base_config(work / run);
        c.generate.count_per_family = 20;
        c.train.epochs = 3;
        cmd_generate(c);
        cmd_build(c);
        for (ModelKind k : {ModelKind::bgrl, ModelKind::graphcl}) {
            CommandOptions o;
            o.model = k;
            o.quiet = true;
            cmd_train(c, o);
            cmd_embed(c, o);
            for (const auto* f : {"embeddings.f32", "embeddings.manifest.json"}) {
                const auto rel = std::string(to_string(k)) + "/" + f;
                const auto bytes = file_bytes(c.paths.resolve(c.paths.embeddings) / to_string(k) / f);
                if (run == "det_a") {
                    first[rel] = bytes;
                } else if (first[rel] != bytes || bytes.empty()) {
                    differing.push_back(rel);
                }
            }
        }
    }
    std::string detail = "2 runs x 2 models, 120 scenarios, 3 epochs";
    for (const auto& d : differing) detail += "; differs: " + d;
    return {differing.empty(), detail};
}

struct FullRun {
    json bgrl;
    json graphcl;
    double seconds = 0.0;
    std::string error;
};

FullRun full_pipeline(const fs::path& work) {
    FullRun r;
    const auto root = work / "full";
    fs::remove_all(root);
    fs::create_directories(root);
    try {
        const auto c = base_config(root);
        const auto t0 = Clock::now();
        cmd_generate(c);
        cmd_build(c);
        for (ModelKind k : {ModelKind::bgrl, ModelKind::graphcl}) {
            CommandOptions o;
            o.model = k;
            cmd_train(c, o);
            cmd_embed(c, o);
            (k == ModelKind::bgrl ? r.bgrl : r.graphcl) = cmd_evaluate(c, o);
        }
        r.seconds = seconds_since(t0);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

Outcome validity(const FullRun& r) {
    if (!r.error.empty()) return {false, r.error};
    const double b = r.bgrl["validity_rate"], g = r.graphcl["validity_rate"];
    const bool ok = b >= 0.99 && g >= 0.99 && r.seconds <= 30 * 60;
    return {ok, "bgrl " + fmt(b) + ", graphcl " + fmt(g) + " over " + r.bgrl["validity_trials"].dump() +
                    " trials; 2004 scenarios, 50 epochs, " + fmt(r.seconds / 60.0) + " min for both models"};
}

Outcome beats_untrained(const FullRun& r) {
    if (!r.error.empty()) return {false, r.error};
    const double trained = r.bgrl["validity_rate"], untrained = r.bgrl["validity_rate_untrained"];
    const double gt = r.graphcl["validity_rate"], gu = r.graphcl["validity_rate_untrained"];
    return {trained - untrained >= 0.2, "bgrl " + fmt(trained) + " vs untrained " + fmt(untrained) + " (graphcl " +
                                            fmt(gt) + " vs " + fmt(gu) + ")"};
}

Outcome classifier(const FullRun& r) {
    if (!r.error.empty()) return {false, r.error};
    bool ok = true;
    std::string detail;
    for (const auto& [name, j] : {std::pair<std::string, const json&>{"bgrl", r.bgrl}, {"graphcl", r.graphcl}}) {
        const auto& c = j["classifier"];
        const double acc = c["contain_accuracy"], auprc = c["auprc"], base = c["majority_baseline"];
        const double sacc = c["shuffled_contain_accuracy"], sauprc = c["shuffled_auprc"];
        ok = ok && acc >= 0.80 && acc >= base + 0.20 && auprc >= 0.85 && acc - sacc >= 0.25 && auprc - sauprc >= 0.25;
        if (!detail.empty()) detail += "; ";
        detail += name + " contain " + fmt(acc) + " (majority " + fmt(base) + ", shuffled " + fmt(sacc) + ") auprc " +
                  fmt(auprc) + " (shuffled " + fmt(sauprc) + ")";
    }
    return {ok, detail};
}

Outcome clustering(const FullRun& r) {
    if (!r.error.empty()) return {false, r.error};
    bool ok = true;
    std::string detail;
    for (const auto& [name, j] : {std::pair<std::string, const json&>{"bgrl", r.bgrl}, {"graphcl", r.graphcl}}) {
        bool monotone = true;
        double prev = -1.0;
        double best = -1.0;
        double best_sil = 0.0;
        int best_mcs = 0;
        std::string ratios;
        for (const auto& row : j["clustering"]) {
            const double u = row["unclustered_ratio"];
            monotone = monotone && u >= prev;
            prev = u;
            ratios += (ratios.empty() ? "" : "/") + fmt(u);
            if (!row["multilabel_acc"].is_null() && row["multilabel_acc"].get<double>() > best) {
                best = row["multilabel_acc"];
                best_mcs = row["mcs"];
                best_sil = row["silhouette"].is_null() ? 0.0 : row["silhouette"].get<double>();
            }
        }
        ok = ok && monotone && best >= 0.70 && best_sil > 0.0;
        if (!detail.empty()) detail += "; ";
        detail += name + " unclustered " + ratios + (monotone ? "" : " (not monotone)") + ", best acc " + fmt(best) +
                  " at mcs " + std::to_string(best_mcs) + ", silhouette " + fmt(best_sil);
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string work = "acceptance_run";
    std::vector<int> only;
    app.add_option("--work-dir", work, "scratch directory for pipeline runs");
    app.add_option("--only", only, "run just these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(work);

    const std::set<int> selected(only.begin(), only.end());
    auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

    std::optional<FullRun> full;
    auto full_run = [&]() -> const FullRun& {
        if (!full) full = full_pipeline(work);
        return *full;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"edge SAGE matches naive loop on 100 graphs", edge_sage_oracle},
        {"full-chain gradient check", full_chain_gradient},
        {"permutation and translation invariance", invariance},
        {"embedding validity >= 0.99 for both models", [&] { return validity(full_run()); }},
        {"trained validity beats untrained by >= 0.2", [&] { return beats_untrained(full_run()); }},
        {"downstream classifier", [&] { return classifier(full_run()); }},
        {"clustering sweep", [&] { return clustering(full_run()); }},
        {"metric oracles", metric_oracles},
        {"byte-identical embedding stores", [&] { return determinism(work); }},
        {"EMA and momentum schedule", ema_and_schedule},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (!wanted(n)) continue;
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << criteria[i].first << " ["
                  << out.detail << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
