#pragma once

#include "tsg/scenario.hpp"

#include <string_view>
#include <vector>

namespace tsg {

enum class Family { straight_high_speed, left_turn, right_turn, stop_at_light, overtake, pedestrian_crossing };

const std::vector<Family>& all_families();
std::string_view to_string(Family f);
/// Throws ValidationError for unknown names.
Family parse_family(std::string_view name);

/// Label set attached to every scenario of a family.
std::vector<std::string> family_labels(Family f);

/// Generator contract for one family. Every generated scenario uses dt = 0.5 s,
/// has its ego start heading within +-max_rotation_deg of the +x axis and is
/// translated by up to max_offset meters. Positions are quantized to 1/1024 m so
/// that integer translations are exact in floating point.
struct FamilySpec {
    Family family = Family::straight_high_speed;
    int min_timesteps = 10;
    int max_timesteps = 24;
    int min_obstacles = 2;
    int max_obstacles = 8;
    double max_rotation_deg = 15.0;
    double max_offset = 1000.0;
};

inline constexpr double kGeneratedDt = 0.5;
inline constexpr double kPositionQuantum = 1.0 / 1024.0;

/// Deterministic in (spec, count, seed); scenario i draws from sub-seed seed + i.
std::vector<Scenario> generate_synthetic(const FamilySpec& spec, int count, std::uint64_t seed);
std::vector<Scenario> generate_synthetic(std::string_view family, int count, std::uint64_t seed);

/// `count_per_family` scenarios of every family, concatenated in family order.
std::vector<Scenario> generate_all_families(int count_per_family, std::uint64_t seed);

/// Ego-trajectory summary used by the separability contract.
struct EgoStats {
    double heading_change_deg = 0.0;  // signed, unwrapped, first to last state
    double terminal_speed = 0.0;
    double mean_speed = 0.0;
    double lateral_displacement = 0.0;  // final offset in the initial heading frame
    double max_heading_deviation_deg = 0.0;
};

EgoStats ego_statistics(const Scenario& s);

/// Minimum difference of family means (over 50 scenarios) that separates a
/// pair of families; a pair is separated when at least one statistic differs
/// by at least its margin.
struct SeparabilityMargins {
    double heading_change_deg = 30.0;
    double terminal_speed = 3.0;
    double mean_speed = 2.0;
    double lateral_displacement = 1.5;
};

}  // namespace tsg
