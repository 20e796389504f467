#pragma once

#include "tsg/scenario.hpp"

#include <span>
#include <vector>

namespace tsg::geom {

/// Cumulative arclength at each vertex; front() == 0.
std::vector<double> cumulative_length(std::span<const Point2> line);

/// Point at arclength `s` (clamped to the polyline).
Point2 point_at(std::span<const Point2> line, std::span<const double> cum, double s);

/// Linear interpolation of a per-vertex quantity at arclength `s`.
double value_at(std::span<const double> values, std::span<const double> cum, double s);

/// `n` samples equally spaced in arclength, endpoints included.
std::vector<Point2> resample(std::span<const Point2> line, int n);
std::vector<double> resample_values(std::span<const Point2> line, std::span<const double> values, int n);

struct Projection {
    double distance = 0.0;   // unsigned distance to the closest polyline point
    double lateral = 0.0;    // signed, positive to the left of the travel direction
    double arclength = 0.0;  // along the polyline at the closest point
    double fraction = 0.0;   // arclength / total length, in [0, 1]
    double width = 0.0;      // interpolated local width
};

Projection project(std::span<const Point2> line, std::span<const double> widths, Point2 p);

struct Box {
    double min_x, min_y, max_x, max_y;
};

bool segment_intersects_box(Point2 a, Point2 b, const Box& box);
bool polyline_intersects_box(std::span<const Point2> line, const Box& box);

/// Proper or touching intersection of two closed segments.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);
bool polylines_cross(std::span<const Point2> a, std::span<const Point2> b);

/// Midpoint by arclength.
Point2 arclength_midpoint(std::span<const Point2> line);

}  // namespace tsg::geom
