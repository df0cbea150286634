#include "acousim/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace acousim::geometry {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

int sign(double v, double eps) { return v > eps ? 1 : (v < -eps ? -1 : 0); }

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double eps) {
  return std::min(a.x(), b.x()) - eps <= p.x() && p.x() <= std::max(a.x(), b.x()) + eps &&
         std::min(a.y(), b.y()) - eps <= p.y() && p.y() <= std::max(a.y(), b.y()) + eps;
}

}  // namespace

double signed_area(std::span<const Vec2> polygon) {
  double acc = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * acc;
}

Vec2 centroid(std::span<const Vec2> polygon) {
  const double area = signed_area(polygon);
  Vec2 c = Vec2::Zero();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    const double w = a.x() * b.y() - b.x() * a.y();
    c += (a + b) * w;
  }
  return c / (6.0 * area);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(),
                                 c.cwiseAbs().maxCoeff(), d.cwiseAbs().maxCoeff(), 1.0});
  const double eps = 1e-12 * scale * scale;
  const int d1 = sign(cross(c, d, a), eps);
  const int d2 = sign(cross(c, d, b), eps);
  const int d3 = sign(cross(a, b, c), eps);
  const int d4 = sign(cross(a, b, d), eps);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  const double leps = 1e-12 * scale;
  if (d1 == 0 && on_segment(a, c, d, leps)) return true;
  if (d2 == 0 && on_segment(b, c, d, leps)) return true;
  if (d3 == 0 && on_segment(c, a, b, leps)) return true;
  if (d4 == 0 && on_segment(d, a, b, leps)) return true;
  return false;
}

bool is_simple_polygon(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if ((polygon[i] - polygon[(i + 1) % n]).norm() == 0.0) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2& c = polygon[j];
      const Vec2& d = polygon[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they must not fold back onto each other.
        const Vec2& shared = (j == i + 1) ? b : a;
        const Vec2& p = (j == i + 1) ? a : b;
        const Vec2& q = (j == i + 1) ? d : c;
        const Vec2 u = p - shared;
        const Vec2 v = q - shared;
        const double crs = u.x() * v.y() - u.y() * v.x();
        if (std::abs(crs) <= 1e-12 * u.norm() * v.norm() && u.dot(v) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return std::abs(signed_area(polygon)) > 0.0;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (distance_to_segment(p, polygon[i], polygon[(i + 1) % n]) <= 1e-12) return false;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

bool point_in_polygon_closed(const Vec2& p, std::span<const Vec2> polygon, double tol) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (distance_to_segment(p, polygon[i], polygon[(i + 1) % n]) <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace acousim::geometry
