// End-to-end runs of the tsg binary on a tiny configuration.

#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status = 0;
    std::string out;
};

Run tsg(const fs::path& root, const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + TSG_CLI_PATH + " --quiet --config " + (root / "tsg.ini").string() + " " + args +
                            " 2>" + (root / "stderr.txt").string();
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string stderr_of(const fs::path& root) {
    std::ifstream in(root / "stderr.txt");
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path make_root(const std::string& name) {
    const auto root = fs::temp_directory_path() / name;
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "tsg.ini") << "[generate]\ncount_per_family = 6\n"
                                       "[train]\nepochs = 2\nbatch_size = 8\n"
                                       "[eval]\nvalidity_trials = 40\nmcs_sweep = 3, 5\nmcs = 3\nclassifier_epochs = 5\n"
                                       "[global]\nseed = 5\n";
    return root;
}

void pipeline(const fs::path& root, const std::string& model) {
    const std::vector<std::string> cmds{"generate", "build", "train --model " + model, "embed --model " + model};
    for (const auto& cmd : cmds) {
        const auto r = tsg(root, cmd);
        ASSERT_EQ(r.status, 0) << cmd << "\n" << stderr_of(root);
    }
}

}  // namespace

TEST(Cli, FullPipeline) {
    const auto root = make_root("tsg_cli_full");
    pipeline(root, "bgrl");
    EXPECT_TRUE(fs::exists(root / "data/train.jsonl"));
    EXPECT_TRUE(fs::exists(root / "checkpoints/bgrl.ckpt"));
    EXPECT_TRUE(fs::exists(root / "reports/bgrl_loss.csv"));
    EXPECT_TRUE(fs::exists(root / "embeddings/bgrl/embeddings.f32"));
    EXPECT_FALSE(fs::exists(root / ".tsg.lock"));

    const auto manifest = json::parse(file_bytes(root / "embeddings/bgrl/embeddings.manifest.json"));
    EXPECT_EQ(manifest["count"], 36);
    EXPECT_EQ(manifest["dim"], 128);
    const std::string id = manifest["ids"][4];

    auto r = tsg(root, "query --model bgrl --id " + id + " --k 3");
    ASSERT_EQ(r.status, 0) << stderr_of(root);
    const auto q = json::parse(r.out);
    ASSERT_EQ(q["neighbors"].size(), 3u);
    EXPECT_EQ(q["neighbors"][0]["id"], id);
    EXPECT_EQ(q["neighbors"][0]["distance"], 0.0);

    r = tsg(root, "cluster --model bgrl");
    ASSERT_EQ(r.status, 0) << stderr_of(root);
    EXPECT_EQ(json::parse(r.out)["sweep"].size(), 2u);
    EXPECT_TRUE(fs::exists(root / "reports/bgrl_clusters.json"));
    EXPECT_TRUE(fs::exists(root / "reports/bgrl_clusters_mcs3.csv"));

    r = tsg(root, "evaluate --model bgrl");
    ASSERT_EQ(r.status, 0) << stderr_of(root);
    const auto e = json::parse(file_bytes(root / "reports/bgrl_evaluation.json"));
    for (const auto* k : {"validity_rate", "validity_rate_untrained", "classifier", "clustering"}) {
        EXPECT_TRUE(e.contains(k)) << k;
    }

    r = tsg(root, "plot --model bgrl");
    ASSERT_EQ(r.status, 0) << stderr_of(root);
    EXPECT_TRUE(fs::exists(root / "reports/bgrl_pca.svg"));
    fs::remove_all(root);
}

TEST(Cli, ErrorsAreMachineReadable) {
    const auto root = make_root("tsg_cli_errors");
    auto r = tsg(root, "embed --model graphcl");
    EXPECT_NE(r.status, 0);
    auto err = json::parse(stderr_of(root));
    EXPECT_EQ(err["error"]["command"], "embed");
    EXPECT_EQ(err["error"]["kind"], "missing_input");

    r = tsg(root, "generate", "TSG_TRAIN_EPOCHZ=1");
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(json::parse(stderr_of(root))["error"]["kind"], "validation_error");
    fs::remove_all(root);
}

TEST(Cli, ValidationBeforeWritingAndMismatch) {
    const auto root = make_root("tsg_cli_validate");
    pipeline(root, "graphcl");
    auto r = tsg(root, "cluster --model graphcl --mcs 1");
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(fs::exists(root / "reports/graphcl_clusters.json"));

    r = tsg(root, "embed --model graphcl", "TSG_BUILDER_PE_DIM=8");
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(json::parse(stderr_of(root))["error"]["kind"], "config_mismatch");

    std::ofstream(root / ".tsg.lock") << "1\n";
    r = tsg(root, "embed --model graphcl");
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(json::parse(stderr_of(root))["error"]["kind"], "locked");
    fs::remove_all(root);
}

TEST(Cli, DeterministicStores) {
    const auto a = make_root("tsg_cli_det_a");
    const auto b = make_root("tsg_cli_det_b");
    pipeline(a, "bgrl");
    pipeline(b, "bgrl");
    EXPECT_EQ(file_bytes(a / "embeddings/bgrl/embeddings.f32"), file_bytes(b / "embeddings/bgrl/embeddings.f32"));
    EXPECT_EQ(file_bytes(a / "embeddings/bgrl/embeddings.manifest.json"),
              file_bytes(b / "embeddings/bgrl/embeddings.manifest.json"));
    EXPECT_EQ(file_bytes(a / "checkpoints/bgrl.ckpt"), file_bytes(b / "checkpoints/bgrl.ckpt"));
    fs::remove_all(a);
    fs::remove_all(b);
}
