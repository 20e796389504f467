#include "tsg/geometry.hpp"
#include "tsg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace tsg {

namespace {

constexpr std::array<std::string_view, 8> kO2ONames{"behind",    "in_front",       "left",          "right",
                                                    "same_lane", "must_yield_row", "must_yield_tl", "other"};
constexpr std::array<std::string_view, 2> kO2RNames{"is_on", "is_close"};

// Lateral margin beyond half the lane width that still counts as is_close.
constexpr double kCloseMargin = 5.0;
// Boundary slack so that exact sector boundaries survive trig round-off.
constexpr double kBearingSlack = 1e-9;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RelativeRoad {
    const RoadSegment* segment;
    std::vector<Point2> centerline;  // reference-relative
};

struct NodeRef {
    const Obstacle* obstacle;
    const ObstacleState* state;
    double x;  // reference-relative
    double y;
};

}  // namespace

std::string_view to_string(O2OSubtype v) { return kO2ONames.at(static_cast<std::size_t>(v)); }
std::string_view to_string(O2RSubtype v) { return kO2RNames.at(static_cast<std::size_t>(v)); }

void BuilderConfig::validate() const {
    if (temporal_reach < 1) throw ValidationError("builder.temporal_reach must be >= 1");
    if (!(o2o_radius > 0.0)) throw ValidationError("builder.o2o_radius must be > 0");
    if (!(road_buffer > 0.0)) throw ValidationError("builder.road_buffer must be > 0");
    if (centerline_points < 2) throw ValidationError("builder.centerline_points must be >= 2");
    if (pe_dim < 2 || pe_dim % 2 != 0) throw ValidationError("builder.pe_dim must be even and >= 2");
}

std::uint64_t BuilderConfig::hash() const {
    std::uint64_t h = fnv1a64(&temporal_reach, sizeof temporal_reach);
    h = fnv1a64(&o2o_radius, sizeof o2o_radius, h);
    h = fnv1a64(&road_buffer, sizeof road_buffer, h);
    h = fnv1a64(&centerline_points, sizeof centerline_points, h);
    return fnv1a64(&pe_dim, sizeof pe_dim, h);
}

bool EdgeTable::operator==(const EdgeTable& o) const {
    return src == o.src && dst == o.dst && subtype == o.subtype && features.rows() == o.features.rows() &&
           features.cols() == o.features.cols() && features == o.features;
}

bool HeteroGraph::operator==(const HeteroGraph& o) const {
    auto same = [](const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; };
    return scenario_id == o.scenario_id && reference_point == o.reference_point && same(obstacle_x, o.obstacle_x) &&
           obstacle_ids == o.obstacle_ids && obstacle_t == o.obstacle_t && same(road_x, o.road_x) &&
           segment_ids == o.segment_ids && o2o == o.o2o && r2r == o.r2r && o2r == o.o2r && temporal == o.temporal;
}

Point2 reference_point(const Scenario& s) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& o : s.obstacles) {
        for (const auto& st : o.states) {
            xs.push_back(st.x);
            ys.push_back(st.y);
        }
    }
    if (xs.empty()) {
        throw ValidationError("scenario '" + s.scenario_id + "' has no obstacle states");
    }
    return {median(std::move(xs)), median(std::move(ys))};
}

std::vector<double> sinusoidal_pe(int t, int dim) {
    std::vector<double> pe(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
        const double a = static_cast<double>(t) / freq;
        pe[static_cast<std::size_t>(2 * i)] = std::sin(a);
        pe[static_cast<std::size_t>(2 * i + 1)] = std::cos(a);
    }
    return pe;
}

O2OSubtype classify_bearing(double b) {
    const double a = std::abs(b);
    if (a <= 0.25 * kPi + kBearingSlack) return O2OSubtype::in_front;
    if (a >= 0.75 * kPi - kBearingSlack) return O2OSubtype::behind;
    return b > 0.0 ? O2OSubtype::left : O2OSubtype::right;
}

O2OSubtype classify_o2o_subtype(const O2OQuery& q) {
    if (q.src_yields_to_dst) {
        return *q.src_yields_to_dst == YieldReason::tl ? O2OSubtype::must_yield_tl : O2OSubtype::must_yield_row;
    }
    if (q.src_lane && q.dst_lane && *q.src_lane == *q.dst_lane) {
        return O2OSubtype::same_lane;
    }
    const double dx = q.dst.x - q.src.x;
    const double dy = q.dst.y - q.src.y;
    if (!q.src_lane && !q.dst_lane && std::hypot(dx, dy) > 0.5 * q.o2o_radius) {
        return O2OSubtype::other;
    }
    const double c = std::cos(q.src.heading);
    const double s = std::sin(q.src.heading);
    return classify_bearing(std::atan2(-s * dx + c * dy, c * dx + s * dy));
}

void check_graph_invariants(const HeteroGraph& g, const BuilderConfig& config) {
    auto fail = [&](const std::string& m) { throw ValidationError("graph '" + g.scenario_id + "': " + m); };
    const auto n_obs = g.num_obstacle_nodes();
    const auto n_road = g.num_road_nodes();
    if (g.obstacle_ids.size() != n_obs || g.obstacle_t.size() != n_obs) fail("obstacle arrays misaligned");
    if (g.segment_ids.size() != n_road) fail("segment id array misaligned");
    if (g.obstacle_x.cols() != config.obstacle_feature_dim()) fail("obstacle feature width");
    if (n_road > 0 && g.road_x.cols() != config.road_feature_dim()) fail("road feature width");

    auto check_table = [&](const EdgeTable& e, std::size_t ns, std::size_t nt, int width, const char* name) {
        if (e.dst.size() != e.src.size() || static_cast<std::size_t>(e.features.rows()) != e.src.size() ||
            e.subtype.size() != e.src.size()) {
            fail(std::string(name) + ": misaligned arrays");
        }
        if (!e.src.empty() && e.features.cols() != width) fail(std::string(name) + ": feature width");
        for (std::size_t k = 0; k < e.size(); ++k) {
            if (e.src[k] >= ns || e.dst[k] >= nt) fail(std::string(name) + ": index out of range");
        }
        if (!e.features.allFinite()) fail(std::string(name) + ": non-finite feature");
    };
    check_table(g.o2o, n_obs, n_obs, kO2OFeatureDim, "o2o");
    check_table(g.r2r, n_road, n_road, kR2RFeatureDim, "r2r");
    check_table(g.o2r, n_obs, n_road, kO2RFeatureDim, "o2r");
    check_table(g.temporal, n_obs, n_obs, kTemporalFeatureDim, "temporal");
    if (!g.obstacle_x.allFinite() || !g.road_x.allFinite()) fail("non-finite node feature");

    for (std::size_t k = 0; k < g.o2o.size(); ++k) {
        const auto a = g.o2o.src[k];
        const auto b = g.o2o.dst[k];
        if (a == b) fail("o2o self-loop");
        if (g.obstacle_t[a] != g.obstacle_t[b]) fail("o2o edge across timesteps");
    }
    for (std::size_t k = 0; k < g.temporal.size(); ++k) {
        const auto a = g.temporal.src[k];
        const auto b = g.temporal.dst[k];
        const int d = g.obstacle_t[b] - g.obstacle_t[a];
        if (g.obstacle_ids[a] != g.obstacle_ids[b]) fail("temporal edge across obstacles");
        if (d < 1 || d > config.temporal_reach) fail("temporal edge span out of range");
    }
}

HeteroGraph build_graph(const Scenario& s, const BuilderConfig& config) {
    config.validate();
    HeteroGraph g;
    g.scenario_id = s.scenario_id;
    g.reference_point = reference_point(s);
    const Point2 ref = g.reference_point;

    // Obstacle nodes in canonical (obstacle_id, t) order, positions made
    // reference-relative before any further arithmetic.
    std::vector<const Obstacle*> obstacles;
    for (const auto& o : s.obstacles) obstacles.push_back(&o);
    std::sort(obstacles.begin(), obstacles.end(),
              [](const Obstacle* a, const Obstacle* b) { return a->obstacle_id < b->obstacle_id; });
    std::vector<NodeRef> nodes;
    for (const auto* o : obstacles) {
        for (const auto& st : o->states) {
            nodes.push_back({o, &st, st.x - ref.x, st.y - ref.y});
        }
    }

    const auto n_obs = nodes.size();
    const int obs_dim = config.obstacle_feature_dim();
    g.obstacle_x = Mat::Zero(static_cast<Eigen::Index>(n_obs), obs_dim);
    g.obstacle_ids.reserve(n_obs);
    g.obstacle_t.reserve(n_obs);
    geom::Box box{0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n_obs; ++i) {
        const auto& n = nodes[i];
        const auto& st = *n.state;
        auto row = g.obstacle_x.row(static_cast<Eigen::Index>(i));
        row(0) = n.x;
        row(1) = n.y;
        row(2) = std::cos(st.heading);
        row(3) = std::sin(st.heading);
        row(4) = st.vx;
        row(5) = st.vy;
        row(6) = st.speed();
        row(7) = st.length;
        row(8) = st.width;
        row(kObstacleBaseFeatures + static_cast<int>(n.obstacle->type)) = 1.0;
        row(kObstacleBaseFeatures + kNumObstacleTypes + static_cast<int>(n.obstacle->role)) = 1.0;
        const auto pe = sinusoidal_pe(st.t, config.pe_dim);
        for (int k = 0; k < config.pe_dim; ++k) {
            row(kObstacleBaseFeatures + kNumObstacleTypes + kNumObstacleRoles + k) = pe[static_cast<std::size_t>(k)];
        }
        g.obstacle_ids.push_back(n.obstacle->obstacle_id);
        g.obstacle_t.push_back(st.t);
        if (i == 0) {
            box = {n.x, n.y, n.x, n.y};
        } else {
            box = {std::min(box.min_x, n.x), std::min(box.min_y, n.y), std::max(box.max_x, n.x),
                   std::max(box.max_y, n.y)};
        }
    }
    box.min_x -= config.road_buffer;
    box.min_y -= config.road_buffer;
    box.max_x += config.road_buffer;
    box.max_y += config.road_buffer;

    // Road nodes: segments whose centerline reaches the dilated obstacle box.
    std::vector<RelativeRoad> roads;
    for (const auto& r : s.road_segments) {
        RelativeRoad rr{&r, {}};
        for (const auto& p : r.centerline) rr.centerline.push_back({p.x - ref.x, p.y - ref.y});
        if (geom::polyline_intersects_box(rr.centerline, box)) roads.push_back(std::move(rr));
    }
    std::sort(roads.begin(), roads.end(),
              [](const RelativeRoad& a, const RelativeRoad& b) { return a.segment->segment_id < b.segment->segment_id; });
    const auto n_road = roads.size();
    const int cp = config.centerline_points;
    g.road_x = Mat::Zero(static_cast<Eigen::Index>(n_road), config.road_feature_dim());
    std::map<std::string, std::uint32_t> road_index;
    for (std::size_t r = 0; r < n_road; ++r) {
        const auto& rr = roads[r];
        const auto pts = geom::resample(rr.centerline, cp);
        const auto ws = geom::resample_values(rr.centerline, rr.segment->widths, cp);
        auto row = g.road_x.row(static_cast<Eigen::Index>(r));
        for (int k = 0; k < cp; ++k) {
            row(2 * k) = pts[static_cast<std::size_t>(k)].x;
            row(2 * k + 1) = pts[static_cast<std::size_t>(k)].y;
            row(2 * cp + k) = ws[static_cast<std::size_t>(k)];
        }
        row(3 * cp + static_cast<int>(rr.segment->type)) = 1.0;
        g.segment_ids.push_back(rr.segment->segment_id);
        road_index[rr.segment->segment_id] = static_cast<std::uint32_t>(r);
    }

    // ObstacleToRoad, and each node's is_on lane (closest is_on segment).
    std::vector<std::optional<std::size_t>> lane(n_obs);
    {
        std::vector<double> rows;
        for (std::size_t i = 0; i < n_obs; ++i) {
            double best = 0.0;
            for (std::size_t r = 0; r < n_road; ++r) {
                const auto pr = geom::project(roads[r].centerline, roads[r].segment->widths, {nodes[i].x, nodes[i].y});
                const double half = 0.5 * pr.width;
                O2RSubtype sub;
                if (pr.distance < half) {
                    sub = O2RSubtype::is_on;
                    if (!lane[i] || pr.distance < best) {
                        lane[i] = r;
                        best = pr.distance;
                    }
                } else if (pr.distance < half + kCloseMargin) {
                    sub = O2RSubtype::is_close;
                } else {
                    continue;
                }
                g.o2r.src.push_back(static_cast<std::uint32_t>(i));
                g.o2r.dst.push_back(static_cast<std::uint32_t>(r));
                g.o2r.subtype.push_back(static_cast<std::uint32_t>(sub));
                rows.insert(rows.end(), {pr.lateral, pr.fraction, sub == O2RSubtype::is_on ? 1.0 : 0.0,
                                         sub == O2RSubtype::is_close ? 1.0 : 0.0});
            }
        }
        g.o2r.features = Eigen::Map<Mat>(rows.data(), static_cast<Eigen::Index>(g.o2r.size()), kO2RFeatureDim);
    }

    // ObstacleToObstacle within the radius at each timestep.
    {
        std::map<std::tuple<int, std::string, std::string>, YieldReason> yields;
        if (s.yield_annotations) {
            for (const auto& a : *s.yield_annotations) yields[{a.t, a.yielding, a.yielded_to}] = a.reason;
        }
        std::map<int, std::vector<std::size_t>> by_t;
        for (std::size_t i = 0; i < n_obs; ++i) by_t[g.obstacle_t[i]].push_back(i);

        std::vector<double> rows;
        for (const auto& [t, members] : by_t) {
            for (auto a : members) {
                for (auto b : members) {
                    if (a == b) continue;
                    const auto& sa = *nodes[a].state;
                    const auto& sb = *nodes[b].state;
                    const double dx = nodes[b].x - nodes[a].x;
                    const double dy = nodes[b].y - nodes[a].y;
                    const double dist = std::hypot(dx, dy);
                    if (dist > config.o2o_radius) continue;

                    std::optional<YieldReason> y;
                    if (auto it = yields.find({t, g.obstacle_ids[a], g.obstacle_ids[b]}); it != yields.end()) {
                        y = it->second;
                    }
                    // Classification uses the relative positions so that it is
                    // translation-exact as well.
                    ObstacleState ra = sa;
                    ObstacleState rb = sb;
                    ra.x = nodes[a].x;
                    ra.y = nodes[a].y;
                    rb.x = nodes[b].x;
                    rb.y = nodes[b].y;
                    const auto sub = classify_o2o_subtype({ra, rb, lane[a], lane[b], y, config.o2o_radius});

                    const double c = std::cos(sa.heading);
                    const double sn = std::sin(sa.heading);
                    const double dvx = sb.vx - sa.vx;
                    const double dvy = sb.vy - sa.vy;
                    const double dh = sb.heading - sa.heading;
                    const std::size_t base = rows.size();
                    rows.resize(base + kO2OFeatureDim, 0.0);
                    rows[base + 0] = c * dx + sn * dy;
                    rows[base + 1] = -sn * dx + c * dy;
                    rows[base + 2] = c * dvx + sn * dvy;
                    rows[base + 3] = -sn * dvx + c * dvy;
                    rows[base + 4] = dist;
                    rows[base + 5] = std::cos(dh);
                    rows[base + 6] = std::sin(dh);
                    rows[base + kO2OGeomFeatures + static_cast<std::size_t>(sub)] = 1.0;
                    g.o2o.src.push_back(static_cast<std::uint32_t>(a));
                    g.o2o.dst.push_back(static_cast<std::uint32_t>(b));
                    g.o2o.subtype.push_back(static_cast<std::uint32_t>(sub));
                }
            }
        }
        g.o2o.features = Eigen::Map<Mat>(rows.data(), static_cast<Eigen::Index>(g.o2o.size()), kO2OFeatureDim);
    }

    // RoadToRoad: declared connections, plus `intersecting` for crossing
    // centerlines that carry no declaration in either direction.
    {
        std::vector<Point2> mids;
        for (const auto& rr : roads) mids.push_back(geom::arclength_midpoint(rr.centerline));
        std::vector<double> rows;
        auto add = [&](std::uint32_t a, std::uint32_t b, RoadRelation rel) {
            const std::size_t base = rows.size();
            rows.resize(base + kR2RFeatureDim, 0.0);
            rows[base + 0] = mids[b].x - mids[a].x;
            rows[base + 1] = mids[b].y - mids[a].y;
            rows[base + kR2RGeomFeatures + static_cast<std::size_t>(rel)] = 1.0;
            g.r2r.src.push_back(a);
            g.r2r.dst.push_back(b);
            g.r2r.subtype.push_back(static_cast<std::uint32_t>(rel));
        };
        std::vector<std::vector<bool>> declared(n_road, std::vector<bool>(n_road, false));
        for (std::size_t a = 0; a < n_road; ++a) {
            for (const auto& c : roads[a].segment->connections) {
                auto it = road_index.find(c.target);
                if (it == road_index.end()) continue;
                add(static_cast<std::uint32_t>(a), it->second, c.relation);
                declared[a][it->second] = true;
                declared[it->second][a] = true;
            }
        }
        for (std::size_t a = 0; a < n_road; ++a) {
            for (std::size_t b = a + 1; b < n_road; ++b) {
                if (declared[a][b]) continue;
                if (geom::polylines_cross(roads[a].centerline, roads[b].centerline)) {
                    add(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), RoadRelation::intersecting);
                    add(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a), RoadRelation::intersecting);
                }
            }
        }
        g.r2r.features = Eigen::Map<Mat>(rows.data(), static_cast<Eigen::Index>(g.r2r.size()), kR2RFeatureDim);
    }

    // Temporal: past -> present, up to temporal_reach hops back.
    {
        std::map<std::pair<std::string, int>, std::size_t> index;
        for (std::size_t i = 0; i < n_obs; ++i) index[{g.obstacle_ids[i], g.obstacle_t[i]}] = i;
        std::vector<double> rows;
        const double reach = static_cast<double>(config.temporal_reach);
        for (std::size_t i = 0; i < n_obs; ++i) {
            for (int d = 1; d <= config.temporal_reach; ++d) {
                auto it = index.find({g.obstacle_ids[i], g.obstacle_t[i] - d});
                if (it == index.end()) continue;
                const std::size_t j = it->second;
                rows.insert(rows.end(),
                            {static_cast<double>(d) / reach, nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y});
                g.temporal.src.push_back(static_cast<std::uint32_t>(j));
                g.temporal.dst.push_back(static_cast<std::uint32_t>(i));
                g.temporal.subtype.push_back(0);
            }
        }
        g.temporal.features =
            Eigen::Map<Mat>(rows.data(), static_cast<Eigen::Index>(g.temporal.size()), kTemporalFeatureDim);
    }
    return g;
}

}  // namespace tsg
