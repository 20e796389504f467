#pragma once

#include "tsg/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsg {

enum class ObstacleType { vehicle, pedestrian, cyclist, other };
enum class ObstacleRole { static_, dynamic };
enum class RoadType { lanelet, walkway, other };
enum class RoadRelation { predecessor, successor, adj_left, adj_right, merging, diverging, intersecting, other };
enum class YieldReason { row, tl };

inline constexpr int kNumObstacleTypes = 4;
inline constexpr int kNumObstacleRoles = 2;
inline constexpr int kNumRoadTypes = 3;
inline constexpr int kNumRoadRelations = 8;

std::string_view to_string(ObstacleType v);
std::string_view to_string(ObstacleRole v);
std::string_view to_string(RoadType v);
std::string_view to_string(RoadRelation v);
std::string_view to_string(YieldReason v);

// Parsers throw ValidationError on unknown names.
ObstacleType parse_obstacle_type(std::string_view s);
ObstacleRole parse_obstacle_role(std::string_view s);
RoadType parse_road_type(std::string_view s);
RoadRelation parse_road_relation(std::string_view s);
YieldReason parse_yield_reason(std::string_view s);

struct ObstacleState {
    int t = 0;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double length = 1.0;
    double width = 1.0;

    double speed() const;
    bool operator==(const ObstacleState&) const = default;
};

struct Obstacle {
    std::string obstacle_id;
    ObstacleType type = ObstacleType::vehicle;
    ObstacleRole role = ObstacleRole::dynamic;
    bool is_ego = false;
    std::vector<ObstacleState> states;

    bool operator==(const Obstacle&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct RoadConnection {
    std::string target;
    RoadRelation relation = RoadRelation::other;
    bool operator==(const RoadConnection&) const = default;
};

struct RoadSegment {
    std::string segment_id;
    RoadType type = RoadType::lanelet;
    std::vector<Point2> centerline;
    std::vector<double> widths;
    std::vector<RoadConnection> connections;

    bool operator==(const RoadSegment&) const = default;
};

struct YieldAnnotation {
    int t = 0;
    std::string yielding;
    std::string yielded_to;
    YieldReason reason = YieldReason::row;

    bool operator==(const YieldAnnotation&) const = default;
};

struct Scenario {
    std::string scenario_id;
    double dt = 0.5;
    int num_timesteps = 1;
    std::vector<Obstacle> obstacles;
    std::vector<RoadSegment> road_segments;
    std::vector<std::string> labels;
    std::optional<std::vector<YieldAnnotation>> yield_annotations;

    bool operator==(const Scenario&) const = default;
};

/// The ten scenario tags used throughout the pipeline.
const std::vector<std::string>& default_label_vocabulary();

/// Checks every record invariant. Throws ValidationError naming the
/// scenario_id and the offending field. An empty `vocab` disables the
/// label-vocabulary check.
void validate(const Scenario& s, const std::vector<std::string>& vocab);

// JSONL ingestion. One scenario object per line, blank lines skipped.
std::vector<Scenario> read_scenarios(std::istream& in, const std::vector<std::string>& vocab);
std::vector<Scenario> load_scenarios(const std::string& path, const std::vector<std::string>& vocab);

std::string scenario_to_json_line(const Scenario& s);
void write_scenarios(std::ostream& out, const std::vector<Scenario>& scenarios);
void save_scenarios(const std::string& path, const std::vector<Scenario>& scenarios);

/// Deterministic shuffle then cut at floor(N * train_ratio).
struct Split {
    std::vector<Scenario> train;
    std::vector<Scenario> test;
};
Split split(const std::vector<Scenario>& scenarios, double train_ratio, std::uint64_t seed);

/// Index form of split(); the returned index lists partition [0, n).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_ratio,
                                                                            std::uint64_t seed);

}  // namespace tsg
