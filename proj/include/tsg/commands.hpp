#pragma once

#include "tsg/config.hpp"
#include "tsg/model.hpp"
#include "tsg/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsg {

// Artifact layout under paths.root:
//   <data>/train.jsonl, <data>/test.jsonl
//   <cache>/<scenario_id>.<builder hash>.tsgg
//   <checkpoints>/<model>.ckpt
//   <embeddings>/<model>/embeddings.manifest.json + embeddings.f32
//   <reports>/<model>_loss.csv, <model>_clusters.json, <model>_clusters_mcs<N>.csv,
//   <reports>/<model>_evaluation.json, <model>_pca.svg

/// Exclusive per-root lock (<root>/.tsg.lock), released on destruction.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& root);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

struct CommandOptions {
    ModelKind model = ModelKind::bgrl;
    std::optional<int> mcs;
    std::optional<int> k;
    std::string query_id;
    bool quiet = false;
};

nlohmann::json cmd_generate(const PipelineConfig& config);
nlohmann::json cmd_build(const PipelineConfig& config);
nlohmann::json cmd_train(const PipelineConfig& config, const CommandOptions& options);
nlohmann::json cmd_embed(const PipelineConfig& config, const CommandOptions& options);
nlohmann::json cmd_cluster(const PipelineConfig& config, const CommandOptions& options);
nlohmann::json cmd_evaluate(const PipelineConfig& config, const CommandOptions& options);
nlohmann::json cmd_query(const PipelineConfig& config, const CommandOptions& options);
nlohmann::json cmd_plot(const PipelineConfig& config, const CommandOptions& options);

/// Train and test scenarios as written by cmd_generate.
std::pair<std::vector<Scenario>, std::vector<Scenario>> load_split(const PipelineConfig& config);

/// Graphs for `scenarios`, through the cache.
std::vector<HeteroGraph> load_graphs(const PipelineConfig& config, const std::vector<Scenario>& scenarios);

}  // namespace tsg
