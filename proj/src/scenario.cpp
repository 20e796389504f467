#include "tsg/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace tsg {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) {
            return static_cast<E>(i);
        }
    }
    throw ValidationError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 4> kObstacleTypeNames{"vehicle", "pedestrian", "cyclist", "other"};
constexpr std::array<std::string_view, 2> kRoleNames{"static", "dynamic"};
constexpr std::array<std::string_view, 3> kRoadTypeNames{"lanelet", "walkway", "other"};
constexpr std::array<std::string_view, 8> kRelationNames{"predecessor", "successor",  "adj_left",     "adj_right",
                                                         "merging",     "diverging",  "intersecting", "other"};
constexpr std::array<std::string_view, 2> kReasonNames{"row", "tl"};

[[noreturn]] void fail(const Scenario& s, const std::string& field, const std::string& msg) {
    throw ValidationError("scenario '" + s.scenario_id + "': field '" + field + "': " + msg);
}

bool finite_all(std::initializer_list<double> v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

// --- JSON <-> records -------------------------------------------------------

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw std::invalid_argument(std::string("missing key '") + key + "'");
    }
    return *it;
}

int as_timestep(const json& v) {
    const double d = v.get<double>();
    if (!std::isfinite(d) || d != std::floor(d)) {
        throw std::invalid_argument("state timestep must be an integer");
    }
    return static_cast<int>(d);
}

Scenario scenario_from_json(const json& j) {
    static const std::set<std::string> kKeys{"scenario_id", "dt",           "num_timesteps",    "labels",
                                             "obstacles",   "road_segments", "yield_annotations"};
    if (!j.is_object()) {
        throw std::invalid_argument("scenario record must be a JSON object");
    }
    for (const auto& [k, v] : j.items()) {
        if (!kKeys.contains(k)) {
            throw std::invalid_argument("unexpected key '" + k + "'");
        }
    }
    Scenario s;
    s.scenario_id = require(j, "scenario_id").get<std::string>();
    s.dt = require(j, "dt").get<double>();
    s.num_timesteps = require(j, "num_timesteps").get<int>();
    s.labels = require(j, "labels").get<std::vector<std::string>>();

    for (const auto& jo : require(j, "obstacles")) {
        Obstacle o;
        o.obstacle_id = require(jo, "obstacle_id").get<std::string>();
        o.type = parse_obstacle_type(require(jo, "type").get<std::string>());
        o.role = parse_obstacle_role(require(jo, "role").get<std::string>());
        o.is_ego = require(jo, "is_ego").get<bool>();
        for (const auto& js : require(jo, "states")) {
            if (!js.is_array() || js.size() != 8) {
                throw std::invalid_argument("obstacle state must be an array of 8 numbers");
            }
            ObstacleState st;
            st.t = as_timestep(js[0]);
            st.x = js[1].get<double>();
            st.y = js[2].get<double>();
            st.heading = js[3].get<double>();
            st.vx = js[4].get<double>();
            st.vy = js[5].get<double>();
            st.length = js[6].get<double>();
            st.width = js[7].get<double>();
            o.states.push_back(st);
        }
        s.obstacles.push_back(std::move(o));
    }

    for (const auto& jr : require(j, "road_segments")) {
        RoadSegment r;
        r.segment_id = require(jr, "segment_id").get<std::string>();
        r.type = parse_road_type(require(jr, "type").get<std::string>());
        for (const auto& p : require(jr, "centerline")) {
            if (!p.is_array() || p.size() != 2) {
                throw std::invalid_argument("centerline point must be [x, y]");
            }
            r.centerline.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        r.widths = require(jr, "widths").get<std::vector<double>>();
        for (const auto& c : require(jr, "connections")) {
            r.connections.push_back(
                {require(c, "target").get<std::string>(), parse_road_relation(require(c, "relation").get<std::string>())});
        }
        s.road_segments.push_back(std::move(r));
    }

    const json& ya = require(j, "yield_annotations");
    if (!ya.is_null()) {
        std::vector<YieldAnnotation> anns;
        for (const auto& a : ya) {
            anns.push_back({require(a, "t").get<int>(), require(a, "yielding").get<std::string>(),
                            require(a, "yielded_to").get<std::string>(),
                            parse_yield_reason(require(a, "reason").get<std::string>())});
        }
        s.yield_annotations = std::move(anns);
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["scenario_id"] = s.scenario_id;
    j["dt"] = s.dt;
    j["num_timesteps"] = s.num_timesteps;
    j["labels"] = s.labels;
    json obs = json::array();
    for (const auto& o : s.obstacles) {
        json states = json::array();
        for (const auto& st : o.states) {
            states.push_back({st.t, st.x, st.y, st.heading, st.vx, st.vy, st.length, st.width});
        }
        obs.push_back({{"obstacle_id", o.obstacle_id},
                       {"type", to_string(o.type)},
                       {"role", to_string(o.role)},
                       {"is_ego", o.is_ego},
                       {"states", std::move(states)}});
    }
    j["obstacles"] = std::move(obs);
    json roads = json::array();
    for (const auto& r : s.road_segments) {
        json cl = json::array();
        for (const auto& p : r.centerline) {
            cl.push_back({p.x, p.y});
        }
        json conns = json::array();
        for (const auto& c : r.connections) {
            conns.push_back({{"target", c.target}, {"relation", to_string(c.relation)}});
        }
        roads.push_back({{"segment_id", r.segment_id},
                         {"type", to_string(r.type)},
                         {"centerline", std::move(cl)},
                         {"widths", r.widths},
                         {"connections", std::move(conns)}});
    }
    j["road_segments"] = std::move(roads);
    if (s.yield_annotations) {
        json anns = json::array();
        for (const auto& a : *s.yield_annotations) {
            anns.push_back(
                {{"t", a.t}, {"yielding", a.yielding}, {"yielded_to", a.yielded_to}, {"reason", to_string(a.reason)}});
        }
        j["yield_annotations"] = std::move(anns);
    } else {
        j["yield_annotations"] = nullptr;
    }
    return j;
}

}  // namespace

std::string_view to_string(ObstacleType v) { return kObstacleTypeNames.at(static_cast<std::size_t>(v)); }
std::string_view to_string(ObstacleRole v) { return kRoleNames.at(static_cast<std::size_t>(v)); }
std::string_view to_string(RoadType v) { return kRoadTypeNames.at(static_cast<std::size_t>(v)); }
std::string_view to_string(RoadRelation v) { return kRelationNames.at(static_cast<std::size_t>(v)); }
std::string_view to_string(YieldReason v) { return kReasonNames.at(static_cast<std::size_t>(v)); }

ObstacleType parse_obstacle_type(std::string_view s) {
    return parse_enum<ObstacleType>(s, kObstacleTypeNames, "obstacle type");
}
ObstacleRole parse_obstacle_role(std::string_view s) { return parse_enum<ObstacleRole>(s, kRoleNames, "role"); }
RoadType parse_road_type(std::string_view s) { return parse_enum<RoadType>(s, kRoadTypeNames, "road type"); }
RoadRelation parse_road_relation(std::string_view s) {
    return parse_enum<RoadRelation>(s, kRelationNames, "road relation");
}
YieldReason parse_yield_reason(std::string_view s) { return parse_enum<YieldReason>(s, kReasonNames, "yield reason"); }

double ObstacleState::speed() const { return std::hypot(vx, vy); }

const std::vector<std::string>& default_label_vocabulary() {
    static const std::vector<std::string> vocab{
        "near_pedestrian_on_crosswalk", "high_magnitude_speed",    "starting_left_turn", "starting_right_turn",
        "on_stopline_traffic_light",    "stationary",              "traversing_intersection",
        "following_lane",               "changing_lane",           "behind_long_vehicle"};
    return vocab;
}

void validate(const Scenario& s, const std::vector<std::string>& vocab) {
    if (s.scenario_id.empty()) {
        fail(s, "scenario_id", "must be non-empty");
    }
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) {
        fail(s, "dt", "must be a finite positive number");
    }
    if (s.num_timesteps < 1) {
        fail(s, "num_timesteps", "must be >= 1");
    }
    if (s.obstacles.empty()) {
        fail(s, "obstacles", "at least one obstacle required");
    }

    std::set<std::string> ids;
    int egos = 0;
    for (const auto& o : s.obstacles) {
        const std::string f = "obstacles[" + o.obstacle_id + "]";
        if (o.obstacle_id.empty() || !ids.insert(o.obstacle_id).second) {
            fail(s, f + ".obstacle_id", "must be unique and non-empty");
        }
        egos += o.is_ego ? 1 : 0;
        if (o.states.empty()) {
            fail(s, f + ".states", "at least one state required");
        }
        for (std::size_t i = 0; i < o.states.size(); ++i) {
            const auto& st = o.states[i];
            if (st.t < 0 || st.t >= s.num_timesteps) {
                fail(s, f + ".states.t", "timestep " + std::to_string(st.t) + " outside [0, num_timesteps)");
            }
            if (i > 0 && st.t <= o.states[i - 1].t) {
                fail(s, f + ".states.t", "timesteps must be strictly ascending");
            }
            if (!finite_all({st.x, st.y, st.heading, st.vx, st.vy, st.length, st.width})) {
                fail(s, f + ".states", "non-finite value");
            }
            if (!(st.heading > -kPi && st.heading <= kPi)) {
                fail(s, f + ".states.heading", "must lie in (-pi, pi]");
            }
            if (!(st.length > 0.0) || !(st.width > 0.0)) {
                fail(s, f + ".states.length/width", "extent must be positive");
            }
        }
        if (o.role == ObstacleRole::static_) {
            const auto& a = o.states.front();
            for (const auto& st : o.states) {
                if (std::abs(st.x - a.x) > 1e-6 || std::abs(st.y - a.y) > 1e-6 ||
                    std::abs(st.heading - a.heading) > 1e-6) {
                    fail(s, f + ".states", "static obstacle must keep a constant pose");
                }
            }
        }
    }
    if (egos > 1) {
        fail(s, "obstacles.is_ego", "at most one ego obstacle allowed");
    }

    std::set<std::string> seg_ids;
    for (const auto& r : s.road_segments) {
        if (r.segment_id.empty() || !seg_ids.insert(r.segment_id).second) {
            fail(s, "road_segments.segment_id", "must be unique and non-empty");
        }
    }
    for (const auto& r : s.road_segments) {
        const std::string f = "road_segments[" + r.segment_id + "]";
        if (r.centerline.size() < 2) {
            fail(s, f + ".centerline", "needs at least 2 points");
        }
        if (r.widths.size() != r.centerline.size()) {
            fail(s, f + ".widths", "length must match centerline");
        }
        for (double w : r.widths) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                fail(s, f + ".widths", "widths must be positive");
            }
        }
        for (const auto& p : r.centerline) {
            if (!finite_all({p.x, p.y})) {
                fail(s, f + ".centerline", "non-finite coordinate");
            }
        }
        for (const auto& c : r.connections) {
            if (!seg_ids.contains(c.target)) {
                fail(s, f + ".connections", "unknown target '" + c.target + "'");
            }
        }
    }

    std::set<std::string> labels;
    for (const auto& l : s.labels) {
        if (!labels.insert(l).second) {
            fail(s, "labels", "duplicate label '" + l + "'");
        }
        if (!vocab.empty() && std::find(vocab.begin(), vocab.end(), l) == vocab.end()) {
            fail(s, "labels", "label '" + l + "' not in vocabulary");
        }
    }

    if (s.yield_annotations) {
        for (const auto& a : *s.yield_annotations) {
            if (a.t < 0 || a.t >= s.num_timesteps) {
                fail(s, "yield_annotations.t", "timestep outside [0, num_timesteps)");
            }
            if (!ids.contains(a.yielding) || !ids.contains(a.yielded_to)) {
                fail(s, "yield_annotations", "references unknown obstacle");
            }
        }
    }
}

std::vector<Scenario> read_scenarios(std::istream& in, const std::vector<std::string>& vocab) {
    std::vector<Scenario> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Scenario s;
        try {
            s = scenario_from_json(json::parse(line));
        } catch (const ValidationError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        validate(s, vocab);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> load_scenarios(const std::string& path, const std::vector<std::string>& vocab) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io_error", "cannot open scenario file '" + path + "'");
    }
    return read_scenarios(in, vocab);
}

std::string scenario_to_json_line(const Scenario& s) { return scenario_to_json(s).dump(); }

void write_scenarios(std::ostream& out, const std::vector<Scenario>& scenarios) {
    for (const auto& s : scenarios) {
        out << scenario_to_json_line(s) << '\n';
    }
}

void save_scenarios(const std::string& path, const std::vector<Scenario>& scenarios) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("io_error", "cannot write scenario file '" + path + "'");
    }
    write_scenarios(out, scenarios);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_ratio,
                                                                            std::uint64_t seed) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw ValidationError("train_ratio must lie in (0, 1)");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    // Fisher-Yates with an explicit draw so the permutation does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_ratio + 1e-9));
    return {std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)),
            std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end())};
}

Split split(const std::vector<Scenario>& scenarios, double train_ratio, std::uint64_t seed) {
    auto [tr, te] = split_indices(scenarios.size(), train_ratio, seed);
    Split out;
    for (auto i : tr) out.train.push_back(scenarios[i]);
    for (auto i : te) out.test.push_back(scenarios[i]);
    return out;
}

}  // namespace tsg
