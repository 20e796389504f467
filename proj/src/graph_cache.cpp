#include "tsg/graph_cache.hpp"

#include "tsg/binary_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tsg {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'S', 'G', 'G', 'R', 'A', 'P', 'H'};

json config_json(const BuilderConfig& c) {
    return {{"temporal_reach", c.temporal_reach},
            {"o2o_radius", c.o2o_radius},
            {"road_buffer", c.road_buffer},
            {"centerline_points", c.centerline_points},
            {"pe_dim", c.pe_dim}};
}

struct Block {
    std::string name;
    const Mat* mat = nullptr;
    const std::vector<std::uint32_t>* idx = nullptr;
};

std::vector<Block> blocks_of(const HeteroGraph& g) {
    std::vector<Block> b{{"obstacle_x", &g.obstacle_x, nullptr}, {"road_x", &g.road_x, nullptr}};
    auto add_table = [&](const std::string& name, const EdgeTable& e) {
        b.push_back({name + ".src", nullptr, &e.src});
        b.push_back({name + ".dst", nullptr, &e.dst});
        b.push_back({name + ".features", &e.features, nullptr});
        b.push_back({name + ".subtype", nullptr, &e.subtype});
    };
    add_table("o2o", g.o2o);
    add_table("r2r", g.r2r);
    add_table("o2r", g.o2r);
    add_table("temporal", g.temporal);
    return b;
}

}  // namespace

void round_features_to_float(HeteroGraph& g) {
    auto round = [](Mat& m) { m = m.cast<float>().cast<double>(); };
    round(g.obstacle_x);
    round(g.road_x);
    round(g.o2o.features);
    round(g.r2r.features);
    round(g.o2r.features);
    round(g.temporal.features);
}

void write_graph_cache(const std::filesystem::path& path, const HeteroGraph& g, const BuilderConfig& config) {
    json manifest;
    manifest["scenario_id"] = g.scenario_id;
    manifest["builder_config"] = config_json(config);
    manifest["builder_hash"] = bin::hex64(config.hash());
    manifest["reference_point"] = {g.reference_point.x, g.reference_point.y};
    manifest["counts"] = {{"obstacle_nodes", g.num_obstacle_nodes()}, {"road_nodes", g.num_road_nodes()},
                          {"o2o", g.o2o.size()},  {"r2r", g.r2r.size()},
                          {"o2r", g.o2r.size()},  {"temporal", g.temporal.size()}};
    manifest["obstacle_ids"] = g.obstacle_ids;
    manifest["obstacle_t"] = g.obstacle_t;
    manifest["segment_ids"] = g.segment_ids;

    json blocks = json::array();
    std::uint64_t offset = 0;
    const auto parts = blocks_of(g);
    for (const auto& b : parts) {
        if (b.mat != nullptr) {
            blocks.push_back({{"name", b.name}, {"dtype", "f32"}, {"rows", b.mat->rows()}, {"cols", b.mat->cols()},
                              {"offset", offset}});
            offset += static_cast<std::uint64_t>(b.mat->size()) * 4;
        } else {
            blocks.push_back(
                {{"name", b.name}, {"dtype", "u32"}, {"rows", b.idx->size()}, {"cols", 1}, {"offset", offset}});
            offset += static_cast<std::uint64_t>(b.idx->size()) * 4;
        }
    }
    manifest["blocks"] = std::move(blocks);
    const std::string text = manifest.dump();

    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write graph cache '" + tmp + "'");
        out.write(kMagic, sizeof kMagic);
        bin::put_u32(out, kGraphCacheVersion);
        bin::put_u64(out, text.size());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& b : parts) {
            if (b.mat != nullptr) {
                for (Eigen::Index i = 0; i < b.mat->size(); ++i) {
                    bin::put_f32(out, static_cast<float>(b.mat->data()[i]));
                }
            } else {
                for (auto v : *b.idx) bin::put_u32(out, v);
            }
        }
        if (!out) throw Error("io_error", "failed writing graph cache '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

HeteroGraph read_graph_cache(const std::filesystem::path& path, const BuilderConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot open graph cache '" + path.string() + "'");
    try {
        char magic[8];
        if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
            throw Error("format_error", "not a graph cache file");
        }
        if (bin::get_u32(in) != kGraphCacheVersion) throw Error("format_error", "unsupported graph cache version");
        const auto len = bin::get_u64(in);
        std::string text(len, '\0');
        if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error("format_error", "truncated manifest");
        const json m = json::parse(text);
        if (m.at("builder_hash").get<std::string>() != bin::hex64(config.hash()) ||
            m.at("builder_config") != config_json(config)) {
            throw Error("stale_cache", "graph cache built with a different builder config");
        }

        HeteroGraph g;
        g.scenario_id = m.at("scenario_id").get<std::string>();
        g.reference_point = {m.at("reference_point")[0].get<double>(), m.at("reference_point")[1].get<double>()};
        g.obstacle_ids = m.at("obstacle_ids").get<std::vector<std::string>>();
        g.obstacle_t = m.at("obstacle_t").get<std::vector<int>>();
        g.segment_ids = m.at("segment_ids").get<std::vector<std::string>>();

        const std::streamoff data_start = in.tellg();
        auto read_mat = [&](const json& b, Mat& out) {
            in.seekg(data_start + static_cast<std::streamoff>(b.at("offset").get<std::uint64_t>()));
            out.resize(b.at("rows").get<Eigen::Index>(), b.at("cols").get<Eigen::Index>());
            for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = static_cast<double>(bin::get_f32(in));
        };
        auto read_idx = [&](const json& b, std::vector<std::uint32_t>& out) {
            in.seekg(data_start + static_cast<std::streamoff>(b.at("offset").get<std::uint64_t>()));
            out.resize(b.at("rows").get<std::size_t>());
            for (auto& v : out) v = bin::get_u32(in);
        };
        for (const auto& b : m.at("blocks")) {
            const auto name = b.at("name").get<std::string>();
            if (name == "obstacle_x") {
                read_mat(b, g.obstacle_x);
                continue;
            }
            if (name == "road_x") {
                read_mat(b, g.road_x);
                continue;
            }
            const auto dot = name.find('.');
            const auto table = name.substr(0, dot);
            const auto field = name.substr(dot + 1);
            EdgeTable* e = table == "o2o" ? &g.o2o : table == "r2r" ? &g.r2r : table == "o2r" ? &g.o2r
                           : table == "temporal"                    ? &g.temporal
                                                                    : nullptr;
            if (e == nullptr) throw Error("format_error", "unknown block '" + name + "'");
            if (field == "src") read_idx(b, e->src);
            else if (field == "dst") read_idx(b, e->dst);
            else if (field == "subtype") read_idx(b, e->subtype);
            else if (field == "features") read_mat(b, e->features);
            else throw Error("format_error", "unknown block '" + name + "'");
        }
        check_graph_invariants(g, config);
        return g;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("format_error", "corrupt graph cache '" + path.string() + "': " + e.what());
    }
}

std::filesystem::path graph_cache_path(const std::filesystem::path& dir, const std::string& scenario_id,
                                       const BuilderConfig& config) {
    return dir / (scenario_id + "." + bin::hex64(config.hash()) + ".tsgg");
}

HeteroGraph load_or_build_graph(const std::filesystem::path& dir, const Scenario& s, const BuilderConfig& config) {
    const auto path = graph_cache_path(dir, s.scenario_id, config);
    if (std::filesystem::exists(path)) {
        try {
            return read_graph_cache(path, config);
        } catch (const Error&) {
            // stale or corrupt: fall through and rebuild
        }
    }
    HeteroGraph g = build_graph(s, config);
    round_features_to_float(g);
    write_graph_cache(path, g, config);
    return g;
}

}  // namespace tsg
