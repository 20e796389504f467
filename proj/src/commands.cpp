#include "tsg/commands.hpp"

#include "tsg/checkpoint.hpp"
#include "tsg/embedding_store.hpp"
#include "tsg/evaluation.hpp"
#include "tsg/graph_cache.hpp"
#include "tsg/projection.hpp"
#include "tsg/synthetic.hpp"
#include "tsg/trainer.hpp"
#include "tsg/validity.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>

namespace tsg {

using nlohmann::json;
namespace fs = std::filesystem;

DirectoryLock::DirectoryLock(const fs::path& root) : path_(root / ".tsg.lock") {
    fs::create_directories(root);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw Error("locked", "another tsg command holds '" + path_.string() + "' (remove it if stale)");
        }
        throw Error("io_error", "cannot create lock '" + path_.string() + "': " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

DirectoryLock::~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

namespace {

fs::path data_dir(const PipelineConfig& c) { return c.paths.resolve(c.paths.data); }
fs::path reports_dir(const PipelineConfig& c) { return c.paths.resolve(c.paths.reports); }
fs::path checkpoint_path(const PipelineConfig& c, ModelKind k) {
    return c.paths.resolve(c.paths.checkpoints) / (std::string(to_string(k)) + ".ckpt");
}
fs::path store_dir(const PipelineConfig& c, ModelKind k) {
    return c.paths.resolve(c.paths.embeddings) / std::string(to_string(k));
}
fs::path report_path(const PipelineConfig& c, ModelKind k, const std::string& suffix) {
    return reports_dir(c) / (std::string(to_string(k)) + suffix);
}

void require(const fs::path& p, const std::string& hint) {
    if (!fs::exists(p)) throw Error("missing_input", "'" + p.string() + "' not found; " + hint);
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write '" + tmp + "'");
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

Model load_model_for(const PipelineConfig& c, ModelKind kind) {
    const auto path = checkpoint_path(c, kind);
    require(path, "run `tsg train --model " + std::string(to_string(kind)) + "` first");
    Model m = load_checkpoint(path);
    if (m.kind != kind) throw Error("config_mismatch", "checkpoint '" + path.string() + "' holds another model kind");
    if (!(m.builder == c.builder)) {
        throw Error("config_mismatch", "checkpoint was trained with a different builder config (feature dims drift)");
    }
    if (m.vocab != default_label_vocabulary()) {
        throw Error("config_mismatch", "checkpoint label vocabulary differs from the pipeline vocabulary");
    }
    return m;
}

/// Embedding store joined with scenario labels; train ids first.
EmbeddingSet load_labeled_store(const PipelineConfig& c, ModelKind kind, std::vector<std::size_t>* train_rows,
                                std::vector<std::size_t>* test_rows) {
    const auto dir = store_dir(c, kind);
    require(dir / "embeddings.manifest.json", "run `tsg embed --model " + std::string(to_string(kind)) + "` first");
    EmbeddingSet set = read_embedding_store(dir);
    const auto [train, test] = load_split(c);
    std::map<std::string, std::pair<LabelSet, bool>> meta;
    for (const auto& s : train) meta[s.scenario_id] = {LabelSet(s.labels.begin(), s.labels.end()), true};
    for (const auto& s : test) meta[s.scenario_id] = {LabelSet(s.labels.begin(), s.labels.end()), false};
    set.label_sets.emplace();
    for (std::size_t i = 0; i < set.ids.size(); ++i) {
        const auto it = meta.find(set.ids[i]);
        if (it == meta.end()) {
            throw Error("config_mismatch", "embedding store id '" + set.ids[i] + "' is not in the current data split");
        }
        set.label_sets->push_back(it->second.first);
        if (it->second.second) {
            if (train_rows) train_rows->push_back(i);
        } else if (test_rows) {
            test_rows->push_back(i);
        }
    }
    if (set.size() != meta.size()) throw Error("config_mismatch", "embedding store does not cover the data split");
    return set;
}

std::vector<int> sweep_values(const PipelineConfig& c, const CommandOptions& o) {
    if (o.mcs) return {*o.mcs};
    return c.eval.mcs_sweep;
}

}  // namespace

std::pair<std::vector<Scenario>, std::vector<Scenario>> load_split(const PipelineConfig& config) {
    const auto dir = data_dir(config);
    require(dir / "train.jsonl", "run `tsg generate` first");
    require(dir / "test.jsonl", "run `tsg generate` first");
    const auto& vocab = default_label_vocabulary();
    return {load_scenarios((dir / "train.jsonl").string(), vocab), load_scenarios((dir / "test.jsonl").string(), vocab)};
}

std::vector<HeteroGraph> load_graphs(const PipelineConfig& config, const std::vector<Scenario>& scenarios) {
    const auto dir = config.paths.resolve(config.paths.cache);
    std::vector<HeteroGraph> out;
    out.reserve(scenarios.size());
    for (const auto& s : scenarios) out.push_back(load_or_build_graph(dir, s, config.builder));
    return out;
}

json cmd_generate(const PipelineConfig& config) {
    std::vector<Family> families;
    if (config.generate.families.empty()) {
        families = all_families();
    } else {
        for (const auto& f : config.generate.families) families.push_back(parse_family(f));
    }
    DirectoryLock lock(config.paths.root);
    std::vector<Scenario> all;
    for (std::size_t i = 0; i < families.size(); ++i) {
        FamilySpec spec;
        spec.family = families[i];
        auto part = generate_synthetic(spec, config.generate.count_per_family, config.seed);
        all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    const auto parts = split(all, config.generate.train_ratio, config.seed);
    const auto dir = data_dir(config);
    fs::create_directories(dir);
    save_scenarios((dir / "train.jsonl").string(), parts.train);
    save_scenarios((dir / "test.jsonl").string(), parts.test);
    return {{"command", "generate"},
            {"scenarios", all.size()},
            {"train", parts.train.size()},
            {"test", parts.test.size()},
            {"outputs", {(dir / "train.jsonl").string(), (dir / "test.jsonl").string()}}};
}

json cmd_build(const PipelineConfig& config) {
    const auto [train, test] = load_split(config);
    DirectoryLock lock(config.paths.root);
    std::size_t nodes = 0;
    std::size_t edges = 0;
    for (const auto* part : {&train, &test}) {
        for (const auto& g : load_graphs(config, *part)) {
            nodes += g.num_obstacle_nodes() + g.num_road_nodes();
            edges += g.num_edges();
        }
    }
    return {{"command", "build"},
            {"graphs", train.size() + test.size()},
            {"nodes", nodes},
            {"edges", edges},
            {"cache", config.paths.resolve(config.paths.cache).string()}};
}

json cmd_train(const PipelineConfig& config, const CommandOptions& options) {
    const auto [train, test] = load_split(config);
    DirectoryLock lock(config.paths.root);
    const auto graphs = load_graphs(config, train);
    Model model = Model::create(options.model, config.builder, config.train, default_label_vocabulary());
    Trainer trainer(model, graphs, config.augment);
    double epoch_sum = 0.0;
    long epoch_steps = 0;
    const auto records = trainer.run([&](const TrainRecord& r) {
        epoch_sum += r.loss;
        ++epoch_steps;
        if (r.step % trainer.steps_per_epoch() == 0) {
            if (!options.quiet) {
                std::cerr << "[train " << to_string(options.model) << "] epoch " << r.epoch << "/"
                          << config.train.epochs << " mean loss " << epoch_sum / static_cast<double>(epoch_steps)
                          << '\n';
            }
            epoch_sum = 0.0;
            epoch_steps = 0;
        }
    });
    const auto ckpt = checkpoint_path(config, options.model);
    const auto csv = report_path(config, options.model, "_loss.csv");
    save_checkpoint(ckpt, model);
    write_loss_csv(csv, records);
    const auto means = epoch_mean_losses(records);
    return {{"command", "train"},
            {"model", to_string(options.model)},
            {"steps", records.size()},
            {"first_epoch_loss", means.front()},
            {"last_epoch_loss", means.back()},
            {"checkpoint", ckpt.string()},
            {"checkpoint_hash", checkpoint_hash(ckpt)},
            {"loss_csv", csv.string()}};
}

json cmd_embed(const PipelineConfig& config, const CommandOptions& options) {
    const auto [train, test] = load_split(config);
    const Model model = load_model_for(config, options.model);
    DirectoryLock lock(config.paths.root);
    EmbeddingSet set;
    std::vector<HeteroGraph> graphs = load_graphs(config, train);
    auto test_graphs = load_graphs(config, test);
    graphs.insert(graphs.end(), std::make_move_iterator(test_graphs.begin()), std::make_move_iterator(test_graphs.end()));
    for (const auto& g : graphs) set.ids.push_back(g.scenario_id);
    set.vectors = embed_graphs(model.online, graphs);
    const auto dir = store_dir(config, options.model);
    write_embedding_store(dir, set, {std::string(to_string(options.model)), checkpoint_hash(checkpoint_path(config, options.model))});
    return {{"command", "embed"}, {"model", to_string(options.model)}, {"count", set.size()}, {"store", dir.string()}};
}

json cmd_cluster(const PipelineConfig& config, const CommandOptions& options) {
    const auto set = load_labeled_store(config, options.model, nullptr, nullptr);
    const auto values = sweep_values(config, options);
    for (int m : values) {
        if (m < 2 || static_cast<std::size_t>(m) > set.size()) {
            throw ValidationError("mcs " + std::to_string(m) + " must lie in [2, " + std::to_string(set.size()) + "]");
        }
    }
    std::vector<ClusterReport> reports;
    for (int m : values) reports.push_back(cluster_embeddings(set, m, config.eval.min_samples));

    DirectoryLock lock(config.paths.root);
    json rows = json::array();
    for (const auto& r : reports) {
        rows.push_back(to_json(r));
        write_cluster_csv(report_path(config, options.model, "_clusters_mcs" + std::to_string(r.mcs) + ".csv"), r, set);
    }
    const auto out = report_path(config, options.model, "_clusters.json");
    write_json(out, {{"model", to_string(options.model)}, {"reports", rows}});
    json summary = json::array();
    for (const auto& r : reports) summary.push_back(to_json(r, false));
    return {{"command", "cluster"}, {"model", to_string(options.model)}, {"sweep", summary}, {"report", out.string()}};
}

json cmd_evaluate(const PipelineConfig& config, const CommandOptions& options) {
    const auto [train, test] = load_split(config);
    const Model model = load_model_for(config, options.model);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    const auto set = load_labeled_store(config, options.model, &train_rows, &test_rows);
    const auto test_graphs = load_graphs(config, test);

    const std::uint64_t validity_seed = config.seed + 17;
    const double validity = embedding_validity_rate(test_graphs, model.online, config.augment,
                                                    config.eval.validity_trials, validity_seed);
    const Model untrained = Model::create(options.model, config.builder, config.train, default_label_vocabulary());
    const double validity_untrained = embedding_validity_rate(test_graphs, untrained.online, config.augment,
                                                              config.eval.validity_trials, validity_seed);

    const auto clf = evaluate_classifier(set.subset(train_rows), set.subset(test_rows), default_label_vocabulary(),
                                         config.eval.classifier);
    json sweep = json::array();
    for (int m : sweep_values(config, options)) sweep.push_back(to_json(cluster_embeddings(set, m, config.eval.min_samples), false));

    const json report = {{"model", to_string(options.model)},
                         {"validity_rate", validity},
                         {"validity_rate_untrained", validity_untrained},
                         {"validity_trials", config.eval.validity_trials},
                         {"classifier", to_json(clf)},
                         {"clustering", sweep}};
    DirectoryLock lock(config.paths.root);
    const auto out = report_path(config, options.model, "_evaluation.json");
    write_json(out, report);
    json result = report;
    result["command"] = "evaluate";
    result["report"] = out.string();
    return result;
}

json cmd_query(const PipelineConfig& config, const CommandOptions& options) {
    const auto dir = store_dir(config, options.model);
    require(dir / "embeddings.manifest.json", "run `tsg embed --model " + std::string(to_string(options.model)) + "` first");
    const auto set = read_embedding_store(dir);
    if (options.query_id.empty()) throw ValidationError("query needs --id");
    const auto row = set.index_of(options.query_id);
    const int k = options.k.value_or(config.eval.k);
    if (k < 1) throw ValidationError("--k must be >= 1");
    const auto hits = knn_query(set, set.vectors.row(static_cast<Eigen::Index>(row)),
                                std::min<std::size_t>(static_cast<std::size_t>(k), set.size()));
    json list = json::array();
    for (const auto& h : hits) list.push_back({{"id", h.id}, {"distance", h.distance}});
    return {{"command", "query"}, {"model", to_string(options.model)}, {"id", options.query_id}, {"neighbors", list}};
}

json cmd_plot(const PipelineConfig& config, const CommandOptions& options) {
    const auto set = load_labeled_store(config, options.model, nullptr, nullptr);
    const int mcs = options.mcs.value_or(config.eval.mcs);
    const auto report = cluster_embeddings(set, mcs, config.eval.min_samples);
    const Mat xy = pca_2d(set.vectors);
    DirectoryLock lock(config.paths.root);
    const auto out = report_path(config, options.model, "_pca.svg");
    write_scatter_svg(out, xy, report.assignment,
                      std::string(to_string(options.model)) + " embeddings, PCA, mcs=" + std::to_string(mcs));
    return {{"command", "plot"}, {"model", to_string(options.model)}, {"mcs", mcs}, {"svg", out.string()}};
}

}  // namespace tsg
