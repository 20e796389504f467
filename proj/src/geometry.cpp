#include "tsg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsg::geom {

std::vector<double> cumulative_length(std::span<const Point2> line) {
    std::vector<double> cum(line.size(), 0.0);
    for (std::size_t i = 1; i < line.size(); ++i) {
        cum[i] = cum[i - 1] + std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
    }
    return cum;
}

namespace {

// Index i such that cum[i] <= s <= cum[i+1], plus the local fraction.
std::pair<std::size_t, double> locate(std::span<const double> cum, double s) {
    const std::size_t n = cum.size();
    if (n < 2 || s <= 0.0) {
        return {0, 0.0};
    }
    if (s >= cum.back()) {
        return {n - 2, 1.0};
    }
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
    i = std::min(i, n - 2);
    const double seg = cum[i + 1] - cum[i];
    return {i, seg > 0.0 ? (s - cum[i]) / seg : 0.0};
}

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

}  // namespace

Point2 point_at(std::span<const Point2> line, std::span<const double> cum, double s) {
    if (line.size() == 1) {
        return line.front();
    }
    auto [i, f] = locate(cum, s);
    return {line[i].x + f * (line[i + 1].x - line[i].x), line[i].y + f * (line[i + 1].y - line[i].y)};
}

double value_at(std::span<const double> values, std::span<const double> cum, double s) {
    if (values.size() == 1) {
        return values.front();
    }
    auto [i, f] = locate(cum, s);
    return values[i] + f * (values[i + 1] - values[i]);
}

std::vector<Point2> resample(std::span<const Point2> line, int n) {
    const auto cum = cumulative_length(line);
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double s = n > 1 ? cum.back() * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
        out.push_back(point_at(line, cum, s));
    }
    return out;
}

std::vector<double> resample_values(std::span<const Point2> line, std::span<const double> values, int n) {
    const auto cum = cumulative_length(line);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double s = n > 1 ? cum.back() * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
        out.push_back(value_at(values, cum, s));
    }
    return out;
}

Projection project(std::span<const Point2> line, std::span<const double> widths, Point2 p) {
    const auto cum = cumulative_length(line);
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const Point2 a = line[i];
        const Point2 b = line[i + 1];
        const double ex = b.x - a.x;
        const double ey = b.y - a.y;
        const double len2 = ex * ex + ey * ey;
        double f = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
        f = std::clamp(f, 0.0, 1.0);
        const double cx = a.x + f * ex;
        const double cy = a.y + f * ey;
        const double d = std::hypot(p.x - cx, p.y - cy);
        if (d < best.distance) {
            best.distance = d;
            const double side = ex * (p.y - a.y) - ey * (p.x - a.x);
            best.lateral = side >= 0.0 ? d : -d;
            best.arclength = cum[i] + f * (cum[i + 1] - cum[i]);
            best.width = widths[i] + f * (widths[i + 1] - widths[i]);
        }
    }
    best.fraction = cum.back() > 0.0 ? std::clamp(best.arclength / cum.back(), 0.0, 1.0) : 0.0;
    return best;
}

bool segment_intersects_box(Point2 a, Point2 b, const Box& box) {
    // Liang-Barsky clipping.
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - box.min_x, box.max_x - a.x, a.y - box.min_y, box.max_y - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) {
                return false;
            }
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, r);
        } else {
            t1 = std::min(t1, r);
        }
        if (t0 > t1) {
            return false;
        }
    }
    return true;
}

bool polyline_intersects_box(std::span<const Point2> line, const Box& box) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        if (segment_intersects_box(line[i], line[i + 1], box)) {
            return true;
        }
    }
    return false;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) || (d3 == 0 && on_segment(a, b, c)) ||
           (d4 == 0 && on_segment(a, b, d));
}

bool polylines_cross(std::span<const Point2> a, std::span<const Point2> b) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) {
                return true;
            }
        }
    }
    return false;
}

Point2 arclength_midpoint(std::span<const Point2> line) {
    const auto cum = cumulative_length(line);
    return point_at(line, cum, 0.5 * cum.back());
}

}  // namespace tsg::geom
