#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace acousim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

namespace geometry {

/// Positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> polygon);

Vec2 centroid(std::span<const Vec2> polygon);

/// Closed-segment intersection test, collinear overlaps included.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// True when no two non-adjacent edges touch and no adjacent edges fold back.
bool is_simple_polygon(std::span<const Vec2> polygon);

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// Ray casting with strict inequality: points on an edge are outside.
bool point_in_polygon(const Vec2& p, std::span<const Vec2> polygon);

/// Crossing-number test that also counts boundary points as inside. Used for
/// clipping hits against surface polygons where edges belong to the surface.
bool point_in_polygon_closed(const Vec2& p, std::span<const Vec2> polygon, double tol);

}  // namespace geometry
}  // namespace acousim
