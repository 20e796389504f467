#pragma once

#include "tsg/model.hpp"

#include <filesystem>

namespace tsg {

// Checkpoint file (".ckpt"), little-endian:
//
//   bytes 0..7   magic "TSGCKPT\0"
//   u32          format version (1)
//   u64          header length L
//   L bytes      UTF-8 JSON header: model_kind, builder_config, encoder_config,
//                train_config, vocab, tensors [{name, rows, cols, offset}]
//   float64 row-major tensor data, offsets relative to the end of the header

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, Model& model);
Model load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the checkpoint file bytes, as 16 hex digits.
std::string checkpoint_hash(const std::filesystem::path& path);

}  // namespace tsg
