#pragma once

#include "tsg/common.hpp"
#include "tsg/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsg {

enum class O2OSubtype { behind, in_front, left, right, same_lane, must_yield_row, must_yield_tl, other };
enum class O2RSubtype { is_on, is_close };

inline constexpr int kNumO2OSubtypes = 8;
inline constexpr int kNumO2RSubtypes = 2;

std::string_view to_string(O2OSubtype v);
std::string_view to_string(O2RSubtype v);

// Feature layout widths.
inline constexpr int kObstacleBaseFeatures = 9;  // x, y, cos h, sin h, vx, vy, speed, length, width
inline constexpr int kO2OGeomFeatures = 7;       // dx, dy, dvx, dvy, dist, cos dh, sin dh
inline constexpr int kR2RGeomFeatures = 2;
inline constexpr int kO2RGeomFeatures = 2;
inline constexpr int kTemporalFeatures = 3;

struct BuilderConfig {
    int temporal_reach = 4;
    double o2o_radius = 50.0;
    double road_buffer = 100.0;
    int centerline_points = 10;
    int pe_dim = 16;

    void validate() const;
    int obstacle_feature_dim() const { return kObstacleBaseFeatures + kNumObstacleTypes + kNumObstacleRoles + pe_dim; }
    int road_feature_dim() const { return 3 * centerline_points + kNumRoadTypes; }
    /// Stable hash of all fields; keys graph caches.
    std::uint64_t hash() const;
    bool operator==(const BuilderConfig&) const = default;
};

inline constexpr int kO2OFeatureDim = kO2OGeomFeatures + kNumO2OSubtypes;  // 15
inline constexpr int kR2RFeatureDim = kR2RGeomFeatures + kNumRoadRelations; // 10
inline constexpr int kO2RFeatureDim = kO2RGeomFeatures + kNumO2RSubtypes;   // 4
inline constexpr int kTemporalFeatureDim = kTemporalFeatures;                // 3

struct EdgeTable {
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
    Mat features;                        // one row per edge
    std::vector<std::uint32_t> subtype;  // 0 for untyped tables

    std::size_t size() const { return src.size(); }
    bool operator==(const EdgeTable& o) const;
};

/// Scene-centric heterogeneous graph for one scenario. Obstacle nodes are
/// temporally unrolled (one per obstacle state) and sorted by (obstacle_id, t);
/// road nodes are sorted by segment_id.
struct HeteroGraph {
    std::string scenario_id;
    Point2 reference_point;

    Mat obstacle_x;
    std::vector<std::string> obstacle_ids;
    std::vector<int> obstacle_t;

    Mat road_x;
    std::vector<std::string> segment_ids;

    EdgeTable o2o;       // obstacle -> obstacle, same timestep
    EdgeTable r2r;       // road -> road
    EdgeTable o2r;       // obstacle -> road (reversed inside the encoder)
    EdgeTable temporal;  // obstacle(t - delta) -> obstacle(t)

    std::size_t num_obstacle_nodes() const { return static_cast<std::size_t>(obstacle_x.rows()); }
    std::size_t num_road_nodes() const { return static_cast<std::size_t>(road_x.rows()); }
    std::size_t num_edges() const { return o2o.size() + r2r.size() + o2r.size() + temporal.size(); }

    bool operator==(const HeteroGraph& o) const;
};

/// Throws ValidationError if any structural invariant is violated.
void check_graph_invariants(const HeteroGraph& g, const BuilderConfig& config);

/// Component-wise median over every obstacle state position.
Point2 reference_point(const Scenario& s);

std::vector<double> sinusoidal_pe(int t, int dim);

/// Bearing sectors in the source heading frame. Exact boundaries: |b| <= 45 deg
/// is in_front, |b| >= 135 deg is behind, the open sectors between are left/right.
O2OSubtype classify_bearing(double bearing_rad);

struct O2OQuery {
    const ObstacleState& src;
    const ObstacleState& dst;
    std::optional<std::size_t> src_lane;  // index of the is_on segment, if any
    std::optional<std::size_t> dst_lane;
    std::optional<YieldReason> src_yields_to_dst;
    double o2o_radius = 50.0;
};

/// Precedence: yield annotation, then same_lane, then `other` (both off-lane
/// and farther apart than half the radius), then bearing.
O2OSubtype classify_o2o_subtype(const O2OQuery& q);

HeteroGraph build_graph(const Scenario& s, const BuilderConfig& config);

}  // namespace tsg
