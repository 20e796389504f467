#include "tsg/checkpoint.hpp"

#include "tsg/binary_io.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>
#include <map>

namespace tsg {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'S', 'G', 'C', 'K', 'P', 'T', '\0'};

json builder_json(const BuilderConfig& c) {
    return {{"temporal_reach", c.temporal_reach},
            {"o2o_radius", c.o2o_radius},
            {"road_buffer", c.road_buffer},
            {"centerline_points", c.centerline_points},
            {"pe_dim", c.pe_dim}};
}

BuilderConfig builder_from(const json& j) {
    BuilderConfig c;
    c.temporal_reach = j.at("temporal_reach").get<int>();
    c.o2o_radius = j.at("o2o_radius").get<double>();
    c.road_buffer = j.at("road_buffer").get<double>();
    c.centerline_points = j.at("centerline_points").get<int>();
    c.pe_dim = j.at("pe_dim").get<int>();
    return c;
}

json encoder_json(const EncoderConfig& c) {
    return {{"obstacle_in", c.obstacle_in},         {"road_in", c.road_in},
            {"obstacle_hidden", c.obstacle_hidden}, {"road_hidden", c.road_hidden},
            {"embedding_dim", c.embedding_dim},     {"bn_momentum", c.bn_momentum},
            {"bn_eps", c.bn_eps}};
}

EncoderConfig encoder_from(const json& j) {
    EncoderConfig c;
    c.obstacle_in = j.at("obstacle_in").get<int>();
    c.road_in = j.at("road_in").get<int>();
    c.obstacle_hidden = j.at("obstacle_hidden").get<std::array<int, 3>>();
    c.road_hidden = j.at("road_hidden").get<std::array<int, 3>>();
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.bn_momentum = j.at("bn_momentum").get<double>();
    c.bn_eps = j.at("bn_eps").get<double>();
    return c;
}

json train_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"m_base", c.m_base},
            {"tau", c.tau},
            {"ema_interval", c.ema_interval},
            {"grad_clip", c.grad_clip},
            {"predictor_hidden", c.predictor_hidden},
            {"seed", c.seed}};
}

TrainConfig train_from(const json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.m_base = j.at("m_base").get<double>();
    c.tau = j.at("tau").get<double>();
    c.ema_interval = j.at("ema_interval").get<int>();
    c.grad_clip = j.at("grad_clip").get<double>();
    c.predictor_hidden = j.at("predictor_hidden").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model) {
    json header;
    header["model_kind"] = std::string(to_string(model.kind));
    header["builder_config"] = builder_json(model.builder);
    header["encoder_config"] = encoder_json(model.encoder_config);
    header["train_config"] = train_json(model.train);
    header["vocab"] = model.vocab;
    json list = json::array();
    std::uint64_t offset = 0;
    const auto tensors = model.tensors();
    for (const auto& [name, p] : tensors) {
        list.push_back({{"name", name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(p->value.size()) * 8;
    }
    header["tensors"] = std::move(list);
    const std::string text = header.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write checkpoint '" + tmp + "'");
        out.write(kMagic, sizeof kMagic);
        bin::put_u32(out, kCheckpointVersion);
        bin::put_u64(out, text.size());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& entry : tensors) {
            const Mat& v = entry.second->value;
            for (Eigen::Index i = 0; i < v.size(); ++i) bin::put_f64(out, v.data()[i]);
        }
        if (!out) throw Error("io_error", "failed writing checkpoint '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing_input", "cannot open checkpoint '" + path.string() + "'");
    try {
        char magic[8];
        if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic)) {
            throw Error("format_error", "'" + path.string() + "' is not a checkpoint");
        }
        if (bin::get_u32(in) != kCheckpointVersion) throw Error("format_error", "unsupported checkpoint version");
        const auto len = bin::get_u64(in);
        std::string text(len, '\0');
        if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error("format_error", "truncated header");
        const json h = json::parse(text);

        const auto kind = parse_model_kind(h.at("model_kind").get<std::string>());
        const auto builder = builder_from(h.at("builder_config"));
        const auto train = train_from(h.at("train_config"));
        const auto vocab = h.at("vocab").get<std::vector<std::string>>();
        Model m = Model::create(kind, builder, train, vocab);
        if (!(encoder_from(h.at("encoder_config")) == m.encoder_config)) {
            throw Error("config_mismatch", "checkpoint encoder config does not match its builder config");
        }

        std::map<std::string, nn::Param*> by_name;
        for (const auto& [name, p] : m.tensors()) by_name[name] = p;
        const std::streamoff data_start = in.tellg();
        std::size_t seen = 0;
        for (const auto& t : h.at("tensors")) {
            const auto name = t.at("name").get<std::string>();
            const auto it = by_name.find(name);
            if (it == by_name.end()) throw Error("format_error", "unexpected tensor '" + name + "'");
            Mat& v = it->second->value;
            if (t.at("rows").get<Eigen::Index>() != v.rows() || t.at("cols").get<Eigen::Index>() != v.cols()) {
                throw Error("config_mismatch", "tensor '" + name + "' has unexpected shape");
            }
            in.seekg(data_start + static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>()));
            for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = bin::get_f64(in);
            ++seen;
        }
        if (seen != by_name.size()) throw Error("format_error", "checkpoint is missing tensors");
        return m;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("format_error", "corrupt checkpoint '" + path.string() + "': " + e.what());
    }
}

std::string checkpoint_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing_input", "cannot open checkpoint '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bin::hex64(fnv1a64(bytes.data(), bytes.size()));
}

}  // namespace tsg
