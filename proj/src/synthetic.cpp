#include "tsg/synthetic.hpp"

#include "tsg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tsg {

namespace {

constexpr std::array<std::string_view, 6> kFamilyNames{"straight_high_speed", "left_turn",  "right_turn",
                                                       "stop_at_light",       "overtake",   "pedestrian_crossing"};

constexpr double kLaneWidth = 3.5;
constexpr double kWalkwayWidth = 3.0;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Dense polyline path with arclength lookup.
class Path {
public:
    explicit Path(std::vector<Point2> pts) : pts_(std::move(pts)), cum_(geom::cumulative_length(pts_)) {}

    Point2 at(double s) const { return geom::point_at(pts_, cum_, s); }

    double heading_at(double s) const {
        s = std::clamp(s, 0.0, cum_.back());
        auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        std::size_t i = static_cast<std::size_t>(it - cum_.begin());
        i = std::clamp<std::size_t>(i, 1, pts_.size() - 1);
        return std::atan2(pts_[i].y - pts_[i - 1].y, pts_[i].x - pts_[i - 1].x);
    }

private:
    std::vector<Point2> pts_;
    std::vector<double> cum_;
};

std::vector<Point2> line(Point2 a, Point2 b, double step = 0.5) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    std::vector<Point2> out;
    for (int k = 0; k <= n; ++k) {
        const double f = static_cast<double>(k) / n;
        out.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
    }
    return out;
}

std::vector<Point2> arc(Point2 center, double radius, double a0, double a1, int n) {
    std::vector<Point2> out;
    for (int k = 0; k <= n; ++k) {
        const double a = a0 + (a1 - a0) * static_cast<double>(k) / n;
        out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
    return out;
}

std::vector<Point2> concat(std::initializer_list<std::vector<Point2>> parts) {
    std::vector<Point2> out;
    for (const auto& p : parts) {
        auto begin = p.begin();
        if (!out.empty() && !p.empty() && out.back() == p.front()) ++begin;
        out.insert(out.end(), begin, p.end());
    }
    return out;
}

/// Speed profile sampled per timestep, integrated with the trapezoid rule.
std::vector<double> integrate(const std::vector<double>& v, double dt, double s0) {
    std::vector<double> s(v.size());
    s[0] = s0;
    for (std::size_t k = 1; k < v.size(); ++k) s[k] = s[k - 1] + 0.5 * dt * (v[k - 1] + v[k]);
    return s;
}

struct Builder {
    Scenario sc;
    Rng& rng;
    int steps;

    void add_moving(const std::string& id, ObstacleType type, bool ego, const Path& path,
                    const std::vector<double>& speed, double s0, double length, double width) {
        Obstacle o;
        o.obstacle_id = id;
        o.type = type;
        o.role = ObstacleRole::dynamic;
        o.is_ego = ego;
        const auto s = integrate(speed, sc.dt, s0);
        for (int t = 0; t < steps; ++t) {
            const auto k = static_cast<std::size_t>(t);
            const Point2 p = path.at(s[k]);
            const double h = path.heading_at(s[k]);
            o.states.push_back({t, p.x, p.y, h, speed[k] * std::cos(h), speed[k] * std::sin(h), length, width});
        }
        sc.obstacles.push_back(std::move(o));
    }

    void add_static(const std::string& id, ObstacleType type, Point2 p, double heading, double length, double width) {
        Obstacle o;
        o.obstacle_id = id;
        o.type = type;
        o.role = ObstacleRole::static_;
        for (int t = 0; t < steps; ++t) o.states.push_back({t, p.x, p.y, heading, 0.0, 0.0, length, width});
        sc.obstacles.push_back(std::move(o));
    }

    void add_road(const std::string& id, RoadType type, std::vector<Point2> cl, double width,
                  std::vector<RoadConnection> conns = {}) {
        RoadSegment r;
        r.segment_id = id;
        r.type = type;
        r.widths.assign(cl.size(), width);
        r.centerline = std::move(cl);
        r.connections = std::move(conns);
        sc.road_segments.push_back(std::move(r));
    }

    std::vector<double> constant_speed(double v0, double accel, double vmin = 0.0) const {
        std::vector<double> v(static_cast<std::size_t>(steps));
        for (int t = 0; t < steps; ++t) v[static_cast<std::size_t>(t)] = std::max(vmin, v0 + accel * t * sc.dt);
        return v;
    }

    // Constant deceleration reaching zero at time t_stop, then standing.
    std::vector<double> stopping_speed(double v0, double t_stop) const {
        std::vector<double> v(static_cast<std::size_t>(steps));
        for (int t = 0; t < steps; ++t) {
            const double time = t * sc.dt;
            v[static_cast<std::size_t>(t)] = time >= t_stop ? 0.0 : v0 * (1.0 - time / t_stop);
        }
        return v;
    }

    std::string vid(int& counter, const char* prefix) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s_%02d", prefix, ++counter);
        return buf;
    }
};

// --- layouts ----------------------------------------------------------------

// Straight road: lane_a at y = 0, lane_b to its left, optional lane_c to its
// right; each lane split into two consecutive segments at x = 160.
void straight_layout(Builder& b, bool third_lane) {
    struct Lane {
        const char* name;
        double y;
    };
    std::vector<Lane> lanes{{"lane_a", 0.0}, {"lane_b", kLaneWidth}};
    if (third_lane) lanes.push_back({"lane_c", -kLaneWidth});
    for (const auto& l : lanes) {
        for (int piece = 1; piece <= 2; ++piece) {
            const std::string id = std::string(l.name) + "_" + std::to_string(piece);
            const double x0 = piece == 1 ? -80.0 : 160.0;
            const double x1 = piece == 1 ? 160.0 : 400.0;
            std::vector<RoadConnection> conns;
            const std::string other_piece = std::string(l.name) + "_" + std::to_string(3 - piece);
            conns.push_back({other_piece, piece == 1 ? RoadRelation::successor : RoadRelation::predecessor});
            const std::string suffix = "_" + std::to_string(piece);
            if (std::string(l.name) == "lane_a") {
                conns.push_back({"lane_b" + suffix, RoadRelation::adj_left});
                if (third_lane) conns.push_back({"lane_c" + suffix, RoadRelation::adj_right});
            } else if (std::string(l.name) == "lane_b") {
                conns.push_back({"lane_a" + suffix, RoadRelation::adj_right});
            } else {
                conns.push_back({"lane_a" + suffix, RoadRelation::adj_left});
            }
            b.add_road(id, RoadType::lanelet, {{x0, l.y}, {x1, l.y}}, kLaneWidth, std::move(conns));
        }
    }
}

enum class Turn { none, left, right };

const Point2 kApproachStart{-120.0, 0.0};
const Point2 kApproachEnd{-10.0, 0.0};
constexpr double kTurnRadius = 10.0;
constexpr double kCrossX = -3.0;

std::vector<Point2> left_arc() { return arc({-10.0, kTurnRadius}, kTurnRadius, -0.5 * kPi, 0.0, 24); }
std::vector<Point2> right_arc() { return arc({-10.0, -kTurnRadius}, kTurnRadius, 0.5 * kPi, 0.0, 24); }

// Four-way intersection around the origin; the ego approaches along +x.
void intersection_layout(Builder& b, Turn turn) {
    std::vector<RoadConnection> approach{{"exit_straight", RoadRelation::successor}};
    if (turn == Turn::left) approach.push_back({"turn_left", RoadRelation::successor});
    if (turn == Turn::right) approach.push_back({"turn_right", RoadRelation::successor});
    b.add_road("approach", RoadType::lanelet, {kApproachStart, kApproachEnd}, kLaneWidth, approach);
    b.add_road("exit_straight", RoadType::lanelet, {{10.0, 0.0}, {120.0, 0.0}}, kLaneWidth,
               {{"approach", RoadRelation::predecessor}});
    b.add_road("cross", RoadType::lanelet, {{kCrossX, -120.0}, {kCrossX, 120.0}}, kLaneWidth);
    if (turn == Turn::left) {
        b.add_road("turn_left", RoadType::lanelet, left_arc(), kLaneWidth,
                   {{"approach", RoadRelation::predecessor}, {"exit_left", RoadRelation::successor}});
        b.add_road("exit_left", RoadType::lanelet, {{0.0, kTurnRadius}, {0.0, 120.0}}, kLaneWidth,
                   {{"turn_left", RoadRelation::predecessor}});
    } else if (turn == Turn::right) {
        b.add_road("turn_right", RoadType::lanelet, right_arc(), kLaneWidth,
                   {{"approach", RoadRelation::predecessor}, {"exit_right", RoadRelation::successor}});
        b.add_road("exit_right", RoadType::lanelet, {{0.0, -kTurnRadius}, {0.0, -120.0}}, kLaneWidth,
                   {{"turn_right", RoadRelation::predecessor}});
    }
}

Path turn_path(Turn turn, double lateral) {
    if (turn == Turn::left) {
        return Path(concat({line({kApproachStart.x, lateral}, {kApproachEnd.x, lateral}),
                            arc({-10.0, kTurnRadius}, kTurnRadius - lateral, -0.5 * kPi, 0.0, 40),
                            line({-lateral, kTurnRadius}, {-lateral, 120.0})}));
    }
    return Path(concat({line({kApproachStart.x, lateral}, {kApproachEnd.x, lateral}),
                        arc({-10.0, -kTurnRadius}, kTurnRadius + lateral, 0.5 * kPi, 0.0, 40),
                        line({lateral, -kTurnRadius}, {lateral, -120.0})}));
}

// Parked vehicles along the right shoulder of the ego road.
void add_parked(Builder& b, int& counter, double x_lo, double x_hi) {
    const double len = uniform(b.rng, 4.0, 5.2);
    b.add_static(b.vid(counter, "veh"), ObstacleType::vehicle, {uniform(b.rng, x_lo, x_hi), -4.2}, 0.0, len, 1.9);
}

// Vehicle crossing the intersection along the cross road, either direction.
std::string add_cross_traffic(Builder& b, int& counter) {
    const bool north = uniform(b.rng, 0.0, 1.0) < 0.5;
    const double x = kCrossX;
    Path p = north ? Path(line({x, -120.0}, {x, 120.0})) : Path(line({x, 120.0}, {x, -120.0}));
    const std::string id = b.vid(counter, "veh");
    b.add_moving(id, ObstacleType::vehicle, false, p, b.constant_speed(uniform(b.rng, 6.0, 11.0), 0.0),
                 uniform(b.rng, 70.0, 110.0), uniform(b.rng, 4.0, 5.0), 1.9);
    return id;
}

// --- families ---------------------------------------------------------------

void gen_straight_high_speed(Builder& b, int others) {
    const bool third = uniform(b.rng, 0.0, 1.0) < 0.5;
    straight_layout(b, third);
    const double lat = uniform(b.rng, -0.3, 0.3);
    const double x0 = uniform(b.rng, -20.0, 0.0);
    const double v0 = uniform(b.rng, 14.0, 18.0);
    b.add_moving("ego", ObstacleType::vehicle, true, Path(line({-80.0, lat}, {400.0, lat})),
                 b.constant_speed(v0, uniform(b.rng, -0.3, 0.3)), x0 + 80.0, 4.6, 1.9);
    int counter = 0;
    const std::vector<double> lanes = third ? std::vector<double>{0.0, kLaneWidth, -kLaneWidth}
                                            : std::vector<double>{0.0, kLaneWidth};
    for (int k = 0; k < others; ++k) {
        const double y = lanes[static_cast<std::size_t>(uniform_int(b.rng, 0, static_cast<int>(lanes.size()) - 1))];
        double x = uniform(b.rng, -40.0, 80.0);
        if (y == 0.0 && std::abs(x - x0) < 12.0) x = x0 + (x >= x0 ? 15.0 : -15.0);
        b.add_moving(b.vid(counter, "veh"), ObstacleType::vehicle, false, Path(line({-80.0, y}, {400.0, y})),
                     b.constant_speed(uniform(b.rng, 12.0, 20.0), 0.0), x + 80.0, uniform(b.rng, 4.2, 5.0), 1.9);
    }
}

void gen_turn(Builder& b, int others, Turn turn) {
    intersection_layout(b, turn);
    const double lat = uniform(b.rng, -0.3, 0.3);
    const Path ego = turn_path(turn, lat);
    const double d0 = uniform(b.rng, 2.0, 8.0);
    const double v0 = uniform(b.rng, 4.5, 6.5);
    const double s0 = (kApproachEnd.x - kApproachStart.x) - d0;
    b.add_moving("ego", ObstacleType::vehicle, true, ego, b.constant_speed(v0, uniform(b.rng, 0.0, 0.3)), s0, 4.6, 1.9);
    int counter = 0;
    for (int k = 0; k < others; ++k) {
        const double r = uniform(b.rng, 0.0, 1.0);
        if (k == 0 && r < 0.5) {
            // Follower on the approach lane.
            b.add_moving(b.vid(counter, "veh"), ObstacleType::vehicle, false, Path(line(kApproachStart, {120.0, 0.0})),
                         b.constant_speed(uniform(b.rng, 4.0, 6.0), 0.0), s0 - uniform(b.rng, 10.0, 20.0), 4.5, 1.9);
        } else if (r < 0.6) {
            add_cross_traffic(b, counter);
        } else {
            add_parked(b, counter, -100.0, -20.0);
        }
    }
}

void gen_stop_at_light(Builder& b, int others) {
    intersection_layout(b, Turn::none);
    const double lat = uniform(b.rng, -0.3, 0.3);
    const double duration = (b.steps - 1) * b.sc.dt;
    const double v0 = uniform(b.rng, 8.0, 12.0);
    const double t_stop = uniform(b.rng, 0.6, 0.95) * duration;
    constexpr double kStopLine = -12.0;
    const double s_stop = kStopLine - kApproachStart.x;
    const double s0 = s_stop - 0.5 * v0 * t_stop - uniform(b.rng, 0.0, 1.0);
    b.add_moving("ego", ObstacleType::vehicle, true, Path(line({kApproachStart.x, lat}, {120.0, lat})),
                 b.stopping_speed(v0, t_stop), s0, 4.6, 1.9);
    int counter = 0;
    std::vector<std::string> cross;
    for (int k = 0; k < others; ++k) {
        const double r = uniform(b.rng, 0.0, 1.0);
        if (k == 0 || r < 0.5) {
            cross.push_back(add_cross_traffic(b, counter));
        } else if (r < 0.75) {
            // Follower stopping behind the ego.
            const double gap = uniform(b.rng, 8.0, 14.0);
            const double v = uniform(b.rng, 7.0, 11.0);
            const double ts = uniform(b.rng, 0.6, 0.95) * duration;
            b.add_moving(b.vid(counter, "veh"), ObstacleType::vehicle, false, Path(line(kApproachStart, {120.0, 0.0})),
                         b.stopping_speed(v, ts), s_stop - gap - 0.5 * v * ts, 4.5, 1.9);
        } else {
            add_parked(b, counter, -100.0, -20.0);
        }
    }
    std::vector<YieldAnnotation> anns;
    for (int t = 0; t < b.steps; ++t) {
        for (const auto& id : cross) anns.push_back({t, "ego", id, YieldReason::tl});
    }
    b.sc.yield_annotations = std::move(anns);
}

void gen_overtake(Builder& b, int others) {
    straight_layout(b, false);
    const double x0 = uniform(b.rng, -20.0, 0.0);
    const double v_ego = uniform(b.rng, 10.0, 13.0);
    const double gap = uniform(b.rng, 12.0, 20.0);
    const double x_lc = x0 + uniform(b.rng, 2.0, 6.0);
    const double lc_len = 3.0 * v_ego;
    // Smoothstep lane change from lane_a to lane_b.
    std::vector<Point2> pts;
    for (double x = -80.0; x <= 400.0; x += 0.5) {
        const double u = std::clamp((x - x_lc) / lc_len, 0.0, 1.0);
        pts.push_back({x, kLaneWidth * u * u * (3.0 - 2.0 * u)});
    }
    b.add_moving("ego", ObstacleType::vehicle, true, Path(std::move(pts)), b.constant_speed(v_ego, 0.0), x0 + 80.0,
                 4.6, 1.9);
    const double truck_len = uniform(b.rng, 12.0, 16.0);
    b.add_moving("truck", ObstacleType::vehicle, false, Path(line({-80.0, 0.0}, {400.0, 0.0})),
                 b.constant_speed(uniform(b.rng, 5.0, 7.0), 0.0), x0 + gap + 80.0, truck_len, 2.5);
    int counter = 0;
    for (int k = 1; k < others; ++k) {
        if (uniform(b.rng, 0.0, 1.0) < 0.5) {
            b.add_moving(b.vid(counter, "veh"), ObstacleType::vehicle, false,
                         Path(line({-80.0, kLaneWidth}, {400.0, kLaneWidth})),
                         b.constant_speed(uniform(b.rng, 14.0, 18.0), 0.0), x0 + 80.0 + uniform(b.rng, 60.0, 120.0),
                         4.5, 1.9);
        } else {
            add_parked(b, counter, x0 - 20.0, x0 + 100.0);
        }
    }
}

void gen_pedestrian_crossing(Builder& b, int others) {
    straight_layout(b, false);
    const double xc = uniform(b.rng, 20.0, 40.0);
    b.add_road("crosswalk", RoadType::walkway, {{xc, -6.0}, {xc, kLaneWidth + 6.0}}, kWalkwayWidth);
    const double duration = (b.steps - 1) * b.sc.dt;
    const double v0 = uniform(b.rng, 4.0, 7.0);
    const double t_stop = uniform(b.rng, 0.15, 0.35) * duration;
    const double lat = uniform(b.rng, -0.3, 0.3);
    const double x_stop = xc - 5.0;
    const double s0 = (x_stop + 80.0) - 0.5 * v0 * t_stop;
    b.add_moving("ego", ObstacleType::vehicle, true, Path(line({-80.0, lat}, {400.0, lat})),
                 b.stopping_speed(v0, t_stop), s0, 4.6, 1.9);
    int counter = 0;
    int peds = 0;
    std::vector<std::string> walkers;
    for (int k = 0; k < others; ++k) {
        const double r = uniform(b.rng, 0.0, 1.0);
        if (k == 0 || r < 0.55) {
            const bool up = uniform(b.rng, 0.0, 1.0) < 0.5;
            const double x = xc + uniform(b.rng, -0.8, 0.8);
            Path p = up ? Path(line({x, -6.0}, {x, kLaneWidth + 6.0})) : Path(line({x, kLaneWidth + 6.0}, {x, -6.0}));
            const std::string id = b.vid(peds, "ped");
            b.add_moving(id, ObstacleType::pedestrian, false, p, b.constant_speed(uniform(b.rng, 0.6, 1.0), 0.0),
                         uniform(b.rng, 0.0, 3.0), 0.6, 0.6);
            walkers.push_back(id);
        } else if (r < 0.8) {
            add_parked(b, counter, xc - 40.0, xc - 10.0);
        } else {
            b.add_static(b.vid(counter, "veh"), ObstacleType::vehicle, {xc - 5.0 - uniform(b.rng, 0.0, 2.0), kLaneWidth},
                         kPi, uniform(b.rng, 4.2, 5.0), 1.9);
        }
    }
    std::vector<YieldAnnotation> anns;
    for (int t = 0; t < b.steps; ++t) {
        for (const auto& id : walkers) anns.push_back({t, "ego", id, YieldReason::row});
    }
    b.sc.yield_annotations = std::move(anns);
}

double quantize(double v) { return std::round(v / kPositionQuantum) * kPositionQuantum; }

void transform(Scenario& s, double theta, Point2 offset) {
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    auto map = [&](double x, double y) {
        return Point2{quantize(c * x - sn * y + offset.x), quantize(sn * x + c * y + offset.y)};
    };
    for (auto& o : s.obstacles) {
        for (auto& st : o.states) {
            const Point2 p = map(st.x, st.y);
            const double vx = c * st.vx - sn * st.vy;
            const double vy = sn * st.vx + c * st.vy;
            st.x = p.x;
            st.y = p.y;
            st.vx = vx;
            st.vy = vy;
            st.heading = normalize_angle(st.heading + theta);
        }
    }
    for (auto& r : s.road_segments) {
        for (auto& p : r.centerline) p = map(p.x, p.y);
    }
}

Scenario generate_one(const FamilySpec& spec, std::uint64_t seed, int index) {
    Rng rng = derive_rng(seed + static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(spec.family));
    Builder b{{}, rng, uniform_int(rng, spec.min_timesteps, spec.max_timesteps)};
    char id[96];
    std::snprintf(id, sizeof id, "%s-s%llu-%05d", std::string(to_string(spec.family)).c_str(),
                  static_cast<unsigned long long>(seed), index);
    b.sc.scenario_id = id;
    b.sc.dt = kGeneratedDt;
    b.sc.num_timesteps = b.steps;
    b.sc.labels = family_labels(spec.family);
    const int others = uniform_int(rng, spec.min_obstacles, spec.max_obstacles) - 1;
    switch (spec.family) {
        case Family::straight_high_speed: gen_straight_high_speed(b, others); break;
        case Family::left_turn: gen_turn(b, others, Turn::left); break;
        case Family::right_turn: gen_turn(b, others, Turn::right); break;
        case Family::stop_at_light: gen_stop_at_light(b, others); break;
        case Family::overtake: gen_overtake(b, others); break;
        case Family::pedestrian_crossing: gen_pedestrian_crossing(b, others); break;
    }
    const double theta = uniform(rng, -spec.max_rotation_deg, spec.max_rotation_deg) * kPi / 180.0;
    const Point2 offset{uniform(rng, -spec.max_offset, spec.max_offset), uniform(rng, -spec.max_offset, spec.max_offset)};
    transform(b.sc, theta, offset);
    return std::move(b.sc);
}

}  // namespace

const std::vector<Family>& all_families() {
    static const std::vector<Family> f{Family::straight_high_speed, Family::left_turn, Family::right_turn,
                                       Family::stop_at_light,       Family::overtake,  Family::pedestrian_crossing};
    return f;
}

std::string_view to_string(Family f) { return kFamilyNames.at(static_cast<std::size_t>(f)); }

Family parse_family(std::string_view name) {
    for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
        if (kFamilyNames[i] == name) return static_cast<Family>(i);
    }
    throw ValidationError("unknown family '" + std::string(name) + "'");
}

std::vector<std::string> family_labels(Family f) {
    switch (f) {
        case Family::straight_high_speed: return {"high_magnitude_speed", "following_lane"};
        case Family::left_turn: return {"starting_left_turn", "traversing_intersection"};
        case Family::right_turn: return {"starting_right_turn", "traversing_intersection"};
        case Family::stop_at_light: return {"on_stopline_traffic_light"};
        case Family::overtake: return {"changing_lane", "behind_long_vehicle"};
        case Family::pedestrian_crossing: return {"near_pedestrian_on_crosswalk", "stationary"};
    }
    return {};
}

std::vector<Scenario> generate_synthetic(const FamilySpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("count must be >= 1");
    if (spec.min_timesteps < 1 || spec.max_timesteps < spec.min_timesteps) {
        throw ValidationError("invalid timestep range");
    }
    if (spec.min_obstacles < 2 || spec.max_obstacles < spec.min_obstacles) {
        throw ValidationError("invalid obstacle range");
    }
    std::vector<Scenario> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(generate_one(spec, seed, i));
    return out;
}

std::vector<Scenario> generate_synthetic(std::string_view family, int count, std::uint64_t seed) {
    FamilySpec spec;
    spec.family = parse_family(family);
    return generate_synthetic(spec, count, seed);
}

std::vector<Scenario> generate_all_families(int count_per_family, std::uint64_t seed) {
    std::vector<Scenario> out;
    for (Family f : all_families()) {
        FamilySpec spec;
        spec.family = f;
        auto part = generate_synthetic(spec, count_per_family, seed);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

EgoStats ego_statistics(const Scenario& s) {
    const Obstacle* ego = nullptr;
    for (const auto& o : s.obstacles) {
        if (o.is_ego) ego = &o;
    }
    if (ego == nullptr) throw ValidationError("scenario '" + s.scenario_id + "' has no ego obstacle");
    EgoStats st;
    const auto& states = ego->states;
    double unwrapped = 0.0;
    double speed_sum = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        speed_sum += states[i].speed();
        if (i > 0) unwrapped += normalize_angle(states[i].heading - states[i - 1].heading);
        st.max_heading_deviation_deg = std::max(st.max_heading_deviation_deg, std::abs(unwrapped) * 180.0 / kPi);
    }
    st.heading_change_deg = unwrapped * 180.0 / kPi;
    st.terminal_speed = states.back().speed();
    st.mean_speed = speed_sum / static_cast<double>(states.size());
    const double h0 = states.front().heading;
    const double dx = states.back().x - states.front().x;
    const double dy = states.back().y - states.front().y;
    st.lateral_displacement = -std::sin(h0) * dx + std::cos(h0) * dy;
    return st;
}

}  // namespace tsg
