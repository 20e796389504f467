#pragma once

#include "tsg/graph.hpp"

#include <filesystem>
#include <string>

namespace tsg {

// Graph cache file (".tsgg"), all integers little-endian:
//
//   bytes 0..7   magic "TSGGRAPH"
//   u32          format version (1)
//   u64          manifest length L
//   L bytes      UTF-8 JSON manifest
//   data section blocks, each at manifest "offset" bytes past the manifest
//
// The manifest carries scenario_id, the builder config echo and its hash, the
// reference point, node/edge counts, obstacle_ids / obstacle_t / segment_ids,
// and a "blocks" list of {name, dtype, rows, cols, offset}. Feature matrices
// are row-major float32; index and subtype arrays are uint32.
//
// Graphs passing through the cache carry float32-rounded features.

inline constexpr std::uint32_t kGraphCacheVersion = 1;

void write_graph_cache(const std::filesystem::path& path, const HeteroGraph& g, const BuilderConfig& config);

/// Throws Error("stale_cache") if the stored builder config differs from `config`.
HeteroGraph read_graph_cache(const std::filesystem::path& path, const BuilderConfig& config);

std::filesystem::path graph_cache_path(const std::filesystem::path& dir, const std::string& scenario_id,
                                       const BuilderConfig& config);

/// Rounds every feature to float32 precision in place.
void round_features_to_float(HeteroGraph& g);

/// Reads the cache entry when present and current, otherwise rebuilds and
/// rewrites it. The result is identical either way.
HeteroGraph load_or_build_graph(const std::filesystem::path& dir, const Scenario& s, const BuilderConfig& config);

}  // namespace tsg
