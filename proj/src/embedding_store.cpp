#include "tsg/embedding_store.hpp"

#include "tsg/binary_io.hpp"

#include <json.hpp>

#include <fstream>

namespace tsg {

using nlohmann::json;

namespace {

const char* kManifest = "embeddings.manifest.json";
const char* kMatrix = "embeddings.f32";

}  // namespace

void write_embedding_store(const std::filesystem::path& dir, const EmbeddingSet& set, const StoreInfo& info) {
    set.validate();
    std::filesystem::create_directories(dir);
    json m;
    m["version"] = kEmbeddingStoreVersion;
    m["count"] = set.size();
    m["dim"] = set.vectors.cols();
    m["model_kind"] = info.model_kind;
    m["checkpoint_hash"] = info.checkpoint_hash;
    m["ids"] = set.ids;

    const auto matrix_tmp = dir / (std::string(kMatrix) + ".tmp");
    {
        std::ofstream out(matrix_tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write '" + matrix_tmp.string() + "'");
        for (Eigen::Index i = 0; i < set.vectors.size(); ++i) bin::put_f32(out, static_cast<float>(set.vectors.data()[i]));
        if (!out) throw Error("io_error", "failed writing '" + matrix_tmp.string() + "'");
    }
    const auto manifest_tmp = dir / (std::string(kManifest) + ".tmp");
    {
        std::ofstream out(manifest_tmp, std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write '" + manifest_tmp.string() + "'");
        out << m.dump(2) << '\n';
    }
    std::filesystem::rename(matrix_tmp, dir / kMatrix);
    std::filesystem::rename(manifest_tmp, dir / kManifest);
}

EmbeddingSet read_embedding_store(const std::filesystem::path& dir, StoreInfo* info) {
    std::ifstream mf(dir / kManifest);
    if (!mf) throw Error("missing_input", "no embedding store at '" + dir.string() + "'");
    json m;
    try {
        mf >> m;
    } catch (const std::exception& e) {
        throw Error("format_error", std::string("embedding manifest: ") + e.what());
    }
    EmbeddingSet set;
    std::size_t count = 0;
    Eigen::Index dim = 0;
    try {
        if (m.at("version").get<int>() != kEmbeddingStoreVersion) {
            throw Error("format_error", "unsupported embedding store version");
        }
        count = m.at("count").get<std::size_t>();
        dim = m.at("dim").get<Eigen::Index>();
        set.ids = m.at("ids").get<std::vector<std::string>>();
        if (info != nullptr) {
            info->model_kind = m.at("model_kind").get<std::string>();
            info->checkpoint_hash = m.at("checkpoint_hash").get<std::string>();
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("format_error", std::string("embedding manifest: ") + e.what());
    }
    if (set.ids.size() != count) throw Error("format_error", "embedding manifest: id list length != count");

    const auto path = dir / kMatrix;
    if (!std::filesystem::exists(path)) throw Error("missing_input", "missing '" + path.string() + "'");
    const auto expected = static_cast<std::uintmax_t>(count) * static_cast<std::uintmax_t>(dim) * 4;
    if (std::filesystem::file_size(path) != expected) {
        throw Error("format_error", "embedding matrix byte length does not equal count x dim x 4");
    }
    std::ifstream in(path, std::ios::binary);
    set.vectors.resize(static_cast<Eigen::Index>(count), dim);
    for (Eigen::Index i = 0; i < set.vectors.size(); ++i) set.vectors.data()[i] = bin::get_f32(in);
    set.validate();
    return set;
}

}  // namespace tsg
