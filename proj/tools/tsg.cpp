// tsg: command-line front end for the scenario-graph embedding pipeline.

#include "tsg/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void print_error(const std::string& command, const std::string& kind, const std::string& message) {
    const nlohmann::json err = {{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic-scenario graph embeddings: generate, build, train, embed, cluster, evaluate, query, plot"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string model = "bgrl";
    std::optional<int> mcs;
    std::optional<int> k;
    std::string id;
    bool quiet = false;
    bool print_config = false;

    app.add_option("--config", config_path, "INI config file");
    app.add_option("--seed", seed, "Global seed (overrides config)");
    app.add_flag("--quiet", quiet, "No progress output");
    app.add_flag("--print-config", print_config, "Print the effective config to stderr before running");

    app.add_subcommand("generate", "Generate synthetic scenarios and the train/test split");
    app.add_subcommand("build", "Build (or refresh) the graph cache");
    auto* train = app.add_subcommand("train", "Train an encoder");
    auto* embed = app.add_subcommand("embed", "Embed every scenario into the embedding store");
    auto* cluster = app.add_subcommand("cluster", "HDBSCAN over stored embeddings (mcs sweep by default)");
    auto* evaluate = app.add_subcommand("evaluate", "Validity, classifier and clustering report");
    auto* query = app.add_subcommand("query", "Nearest stored scenarios to a stored scenario");
    auto* plot = app.add_subcommand("plot", "2-D PCA scatter of stored embeddings as SVG");

    for (auto* sub : {train, embed, cluster, evaluate, query, plot}) {
        sub->add_option("--model", model, "bgrl or graphcl")->check(CLI::IsMember({"bgrl", "graphcl"}));
    }
    for (auto* sub : {cluster, evaluate, plot}) sub->add_option("--mcs", mcs, "min_cluster_size");
    query->add_option("--id", id, "Scenario id to query")->required();
    query->add_option("--k", k, "Number of neighbors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        std::optional<std::filesystem::path> file;
        if (!config_path.empty()) file = config_path;
        tsg::PipelineConfig config = tsg::load_pipeline_config(file, tsg::tsg_environment());
        if (seed) {
            config.seed = *seed;
            config.propagate_seed();
        }
        if (print_config) std::cerr << tsg::to_ini(config);

        tsg::CommandOptions options;
        options.model = tsg::parse_model_kind(model);
        options.mcs = mcs;
        options.k = k;
        options.query_id = id;
        options.quiet = quiet;

        nlohmann::json result;
        if (command == "generate") result = tsg::cmd_generate(config);
        else if (command == "build") result = tsg::cmd_build(config);
        else if (command == "train") result = tsg::cmd_train(config, options);
        else if (command == "embed") result = tsg::cmd_embed(config, options);
        else if (command == "cluster") result = tsg::cmd_cluster(config, options);
        else if (command == "evaluate") result = tsg::cmd_evaluate(config, options);
        else if (command == "query") result = tsg::cmd_query(config, options);
        else if (command == "plot") result = tsg::cmd_plot(config, options);
        std::cout << result.dump(2) << '\n';
        return 0;
    } catch (const tsg::Error& e) {
        print_error(command, e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(command, "internal_error", e.what());
        return 1;
    }
}
