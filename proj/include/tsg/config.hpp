#pragma once

#include "tsg/augment.hpp"
#include "tsg/classifier.hpp"
#include "tsg/graph.hpp"
#include "tsg/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsg {

struct PathsConfig {
    std::filesystem::path root = ".";
    std::filesystem::path data = "data";
    std::filesystem::path cache = "cache";
    std::filesystem::path checkpoints = "checkpoints";
    std::filesystem::path embeddings = "embeddings";
    std::filesystem::path reports = "reports";

    /// `p` resolved against root unless absolute.
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

struct GenerateConfig {
    int count_per_family = 334;
    std::vector<std::string> families;  // empty = all
    double train_ratio = 0.85;
};

struct EvalConfig {
    std::size_t validity_trials = 2000;
    std::vector<int> mcs_sweep{5, 10, 25, 50};
    int mcs = 25;
    int min_samples = 0;  // 0 = same as mcs
    int k = 10;
    ClassifierConfig classifier;
};

struct PipelineConfig {
    PathsConfig paths;
    GenerateConfig generate;
    BuilderConfig builder;
    AugmentConfig augment;
    TrainConfig train;
    EvalConfig eval;
    std::uint64_t seed = 0;

    /// Re-derives every sub-seed from `seed`.
    void propagate_seed();
    void validate() const;
};

/// Reads an INI file (sections paths, generate, builder, augment, train, eval,
/// global) and then applies environment overrides named
/// TSG_<SECTION>_<KEY>. Unknown keys are rejected. Relative paths resolve
/// against the config file's directory unless paths.root is set.
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& file,
                                    const std::map<std::string, std::string>& env);

/// The current process environment restricted to TSG_ variables.
std::map<std::string, std::string> tsg_environment();

/// INI rendering that load_pipeline_config reads back to the same values.
std::string to_ini(const PipelineConfig& config);

}  // namespace tsg
