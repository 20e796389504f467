#pragma once

#include "tsg/embedding_set.hpp"

#include <filesystem>
#include <string>

namespace tsg {

// An embedding store is a directory holding
//   embeddings.manifest.json  {version, count, dim, model_kind, checkpoint_hash, ids}
//   embeddings.f32            count x dim little-endian float32, rows in id order

inline constexpr int kEmbeddingStoreVersion = 1;

struct StoreInfo {
    std::string model_kind;
    std::string checkpoint_hash;
};

void write_embedding_store(const std::filesystem::path& dir, const EmbeddingSet& set, const StoreInfo& info);

/// Label sets are not part of the store; the result has none.
EmbeddingSet read_embedding_store(const std::filesystem::path& dir, StoreInfo* info = nullptr);

}  // namespace tsg
