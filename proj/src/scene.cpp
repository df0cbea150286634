#include "acousim/scene.hpp"

#include "acousim/error.hpp"
#include "acousim/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace acousim {

void validate(const Environment& env) {
  if (!(env.temperature_c >= -20.0 && env.temperature_c <= 50.0)) {
    fail(ErrorCode::InvalidArgument, "temperature_c must lie in [-20, 50] degC");
  }
  if (!(env.relative_humidity >= 0.0 && env.relative_humidity <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "relative_humidity must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Material

Material::Material(std::string name, std::vector<double> band_centers_hz, std::vector<double> coefficients)
    : name_(std::move(name)), centers_(std::move(band_centers_hz)), coefficients_(std::move(coefficients)) {
  if (centers_.size() != coefficients_.size() || coefficients_.empty()) {
    fail(ErrorCode::InvalidArgument, "material '" + name_ + "': band and coefficient counts differ");
  }
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!(centers_[i] > 0.0)) fail(ErrorCode::InvalidArgument, "material '" + name_ + "': band centers must be positive");
    if (i > 0 && !(centers_[i] > centers_[i - 1])) {
      fail(ErrorCode::InvalidArgument, "material '" + name_ + "': band centers must be strictly increasing");
    }
  }
  for (double a : coefficients_) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::InvalidArgument, "material '" + name_ + "': coefficient outside [0, 1]");
  }
}

Material Material::flat(std::string name, double absorption) {
  if (!(absorption >= 0.0 && absorption <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "material '" + name + "': coefficient outside [0, 1]");
  }
  Material m;
  m.name_ = std::move(name);
  m.coefficients_ = {absorption};
  return m;
}

double Material::absorption_at(double frequency_hz) const {
  if (is_flat()) return coefficients_.front();
  const double lf = std::log(frequency_hz);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const double d = std::abs(std::log(centers_[i]) - lf);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return coefficients_[best];
}

bool Material::covers(double low_hz, double high_hz) const {
  if (is_flat()) return true;
  return centers_.front() / std::sqrt(2.0) <= low_hz * (1.0 + 1e-12) &&
         centers_.back() * std::sqrt(2.0) >= high_hz * (1.0 - 1e-12);
}

bool Material::same_absorption(const Material& other) const {
  if (is_flat() && other.is_flat()) return coefficients_.front() == other.coefficients_.front();
  for (double f : octave_band_centers()) {
    if (absorption_at(f) != other.absorption_at(f)) return false;
  }
  return true;
}

Material builtin_material(std::string_view name) {
  const std::vector<double> bands = octave_band_centers();
  if (name == "plywood") {
    // Audible octaves from common panel tables; the ultrasonic octaves carry
    // the mean measured 20-50 kHz value.
    return Material("plywood", bands, {0.28, 0.22, 0.17, 0.09, 0.10, 0.11, 0.11, 0.43, 0.43});
  }
  if (name == "concrete") {
    return Material("concrete", bands, {0.01, 0.01, 0.015, 0.02, 0.02, 0.02, 0.03, 0.05, 0.08});
  }
  if (name == "hard_surface") return Material::flat("hard_surface", 0.02);
  if (name == "anechoic" || name == "open") return Material::flat(std::string(name), 1.0);
  fail(ErrorCode::ValidationError, "unknown material '" + std::string(name) + "'");
}

std::vector<std::string> builtin_material_names() {
  return {"plywood", "concrete", "hard_surface", "anechoic", "open"};
}

// ---------------------------------------------------------------------------
// Directivity

void validate(const Directivity& d) {
  if (!(d.pattern >= 0.0 && d.pattern <= 1.0)) fail(ErrorCode::InvalidArgument, "directivity pattern must lie in [0, 1]");
  if (std::abs(d.orientation.norm() - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "directivity orientation must have unit norm");
  }
}

double directivity_gain(const Directivity& d, const Vec3& direction_to_target) {
  if (d.pattern == 1.0) return 1.0;
  const double c = std::clamp(d.orientation.dot(direction_to_target), -1.0, 1.0);
  return d.pattern + (1.0 - d.pattern) * c;
}

// ---------------------------------------------------------------------------
// Room

namespace {

bool axis_aligned_rectangle(std::span<const Vec2> v) {
  if (v.size() != 4) return false;
  double scale = 1.0;
  for (const Vec2& p : v) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 e = v[(i + 1) % 4] - v[i];
    if (std::abs(e.x()) > tol && std::abs(e.y()) > tol) return false;
  }
  return true;
}

}  // namespace

Room validate_room(const RoomSpec& spec) {
  validate(spec.environment);
  if (spec.floor_vertices.size() < 3) {
    fail(ErrorCode::SelfIntersectingPolygon, "floor polygon needs at least 3 vertices");
  }
  if (!geometry::is_simple_polygon(spec.floor_vertices)) {
    fail(ErrorCode::SelfIntersectingPolygon, "floor polygon is not simple");
  }
  if (!(spec.height > 0.0)) fail(ErrorCode::NonPositiveHeight, "room height must be positive");

  Room room;
  room.floor_ = spec.floor_vertices;
  room.height_ = spec.height;
  room.environment_ = spec.environment;
  const double area = geometry::signed_area(room.floor_);
  room.orientation_ = area > 0.0 ? 1.0 : -1.0;
  room.floor_area_ = std::abs(area);
  room.volume_ = room.floor_area_ * room.height_;
  room.shoebox_ = axis_aligned_rectangle(room.floor_);

  const std::size_t n = room.floor_.size();
  room.min_corner_ = Vec3(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0);
  room.max_corner_ = Vec3(-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), room.height_);
  for (const Vec2& v : room.floor_) {
    room.min_corner_.x() = std::min(room.min_corner_.x(), v.x());
    room.min_corner_.y() = std::min(room.min_corner_.y(), v.y());
    room.max_corner_.x() = std::max(room.max_corner_.x(), v.x());
    room.max_corner_.y() = std::max(room.max_corner_.y(), v.y());
  }
  const Vec2 c2 = geometry::centroid(room.floor_);
  room.center_ = Vec3(c2.x(), c2.y(), 0.5 * room.height_);

  const std::size_t surface_count = n + 2;
  if (spec.rt60_target) {
    if (!room.shoebox_) {
      fail(ErrorCode::RT60OnNonShoebox, "rt60_target is only supported for axis-aligned rectangular floors");
    }
    if (!spec.materials.empty()) {
      fail(ErrorCode::InvalidArgument, "set either per-surface materials or rt60_target, not both");
    }
  } else if (spec.materials.size() != 1 && spec.materials.size() != surface_count) {
    std::ostringstream msg;
    msg << "expected 1 or " << surface_count << " materials, got " << spec.materials.size();
    fail(ErrorCode::InvalidArgument, msg.str());
  }

  room.surfaces_.reserve(surface_count);
  room.wall_lengths_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = room.floor_[i];
    const Vec2& b = room.floor_[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = e.norm();
    Vec2 out(e.y(), -e.x());
    out *= room.orientation_ / len;
    Surface s;
    s.id = static_cast<int>(i);
    s.kind = SurfaceKind::wall;
    s.corners = {Vec3(a.x(), a.y(), 0.0), Vec3(b.x(), b.y(), 0.0), Vec3(b.x(), b.y(), room.height_),
                 Vec3(a.x(), a.y(), room.height_)};
    s.normal = Vec3(out.x(), out.y(), 0.0);
    s.offset = s.normal.dot(s.corners[0]);
    s.area = len * room.height_;
    room.surfaces_.push_back(std::move(s));
    room.wall_lengths_.push_back(len);
  }
  for (int k = 0; k < 2; ++k) {
    Surface s;
    s.id = static_cast<int>(n) + k;
    s.kind = k == 0 ? SurfaceKind::floor : SurfaceKind::ceiling;
    const double z = k == 0 ? 0.0 : room.height_;
    for (const Vec2& v : room.floor_) s.corners.emplace_back(v.x(), v.y(), z);
    s.normal = k == 0 ? Vec3(0, 0, -1) : Vec3(0, 0, 1);
    s.offset = s.normal.dot(s.corners[0]);
    s.area = room.floor_area_;
    room.surfaces_.push_back(std::move(s));
  }
  room.total_area_ = 0.0;
  for (const Surface& s : room.surfaces_) room.total_area_ += s.area;

  if (spec.rt60_target) {
    room.rt60_target_ = spec.rt60_target;
    const SabineResult sabine = inverse_sabine(*spec.rt60_target, room);
    room.recommended_order_ = sabine.max_order;
    for (Surface& s : room.surfaces_) s.material = Material::flat("sabine", sabine.absorption);
  } else {
    for (std::size_t i = 0; i < surface_count; ++i) {
      room.surfaces_[i].material = spec.materials.size() == 1 ? spec.materials.front() : spec.materials[i];
    }
  }
  return room;
}

bool Room::uniform_material() const {
  for (const Surface& s : surfaces_) {
    if (!s.material.same_absorption(surfaces_.front().material)) return false;
  }
  return true;
}

int Room::shoebox_surface(int axis, int side) const {
  require(shoebox_, "shoebox_surface called on a non-shoebox room");
  if (axis == 2) return static_cast<int>(floor_.size()) + side;
  for (std::size_t i = 0; i < floor_.size(); ++i) {
    const Vec3& nrm = surfaces_[i].normal;
    if (std::abs(nrm[axis]) > 0.5 && ((nrm[axis] < 0.0) == (side == 0))) return static_cast<int>(i);
  }
  fail(ErrorCode::InvalidArgument, "no shoebox surface for axis");
}

bool Room::contains(const Vec3& p) const {
  return p.z() > 0.0 && p.z() < height_ && geometry::point_in_polygon(Vec2(p.x(), p.y()), floor_);
}

double Room::clearance(const Vec3& p) const {
  double d = std::min(p.z(), height_ - p.z());
  const Vec2 q(p.x(), p.y());
  const std::size_t n = floor_.size();
  for (std::size_t i = 0; i < n; ++i) {
    d = std::min(d, geometry::distance_to_segment(q, floor_[i], floor_[(i + 1) % n]));
  }
  return d;
}

bool Room::surface_contains(int surface_id, const Vec3& p, double tol) const {
  const Surface& s = surfaces_.at(static_cast<std::size_t>(surface_id));
  if (s.kind == SurfaceKind::wall) {
    const std::size_t i = static_cast<std::size_t>(surface_id);
    const Vec2& a = floor_[i];
    const Vec2& b = floor_[(i + 1) % floor_.size()];
    const double len = wall_lengths_[i];
    const double along = (Vec2(p.x(), p.y()) - a).dot(b - a) / len;
    return along >= -tol && along <= len + tol && p.z() >= -tol && p.z() <= height_ + tol;
  }
  return geometry::point_in_polygon_closed(Vec2(p.x(), p.y()), floor_, tol);
}

std::optional<SurfaceHit> Room::first_hit(const Vec3& origin, const Vec3& direction, double t_min,
                                          double t_max, int skip_surface) const {
  std::optional<SurfaceHit> best;
  for (const Surface& s : surfaces_) {
    if (s.id == skip_surface) continue;
    const double denom = s.normal.dot(direction);
    if (std::abs(denom) < 1e-15) continue;
    const double t = (s.offset - s.normal.dot(origin)) / denom;
    if (!(t > t_min && t < t_max)) continue;
    if (best && t >= best->t) continue;
    const Vec3 point = origin + t * direction;
    if (!surface_contains(s.id, point)) continue;
    best = SurfaceHit{s.id, t, point};
  }
  return best;
}

bool Room::segment_blocked(const Vec3& a, const Vec3& b, int skip_a, int skip_b, double eps) const {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return false;
  const double t_eps = eps / len;
  for (const Surface& s : surfaces_) {
    if (s.id == skip_a || s.id == skip_b) continue;
    const double denom = s.normal.dot(d);
    if (std::abs(denom) < 1e-15 * len) continue;
    const double t = (s.offset - s.normal.dot(a)) / denom;
    if (t <= t_eps || t >= 1.0 - t_eps) continue;
    if (surface_contains(s.id, a + t * d)) return true;
  }
  return false;
}

SabineResult inverse_sabine(double rt60, const Room& room) {
  require(room.is_shoebox(), "inverse_sabine requires a shoebox room");
  require(rt60 > 0.0, "rt60 must be positive");
  const double alpha = kSabineConstant * room.volume() / (room.total_area() * rt60);
  if (alpha >= 1.0) {
    std::ostringstream msg;
    msg << "inverse Sabine absorption " << alpha << " >= 1 (room too small or RT60 too short)";
    fail(ErrorCode::AbsorptionOutOfRange, msg.str());
  }
  // Smallest L1 image order whose lattice ball contains the whole sphere of
  // radius c * rt60 around the room.
  const Vec3 dims = room.dimensions();
  const double reach = speed_of_sound(room.environment().temperature_c) * rt60;
  const double inv = std::sqrt(1.0 / (dims.x() * dims.x()) + 1.0 / (dims.y() * dims.y()) + 1.0 / (dims.z() * dims.z()));
  SabineResult out;
  out.absorption = alpha;
  out.max_order = static_cast<int>(std::ceil(reach * inv)) + 1;
  return out;
}

double sabine_rt60(double absorption, const Room& room) {
  require(absorption > 0.0, "absorption must be positive");
  return kSabineConstant * room.volume() / (room.total_area() * absorption);
}

bool point_in_room(const Vec3& p, const Room& room) { return room.contains(p); }

namespace {

bool inside_with_margin(const Room& room, const Vec3& p, double margin) {
  if (!room.contains(p)) return false;
  return margin <= 0.0 || room.clearance(p) >= margin - 1e-9;
}

}  // namespace

std::vector<Vec3> generate_test_grid(const Room& room, double spacing, double margin) {
  require(spacing > 0.0, "grid spacing must be positive");
  require(margin >= 0.0, "grid margin must be nonnegative");
  const Vec3 lo = room.min_corner();
  const Vec3 dims = room.dimensions();
  std::array<int, 3> count{};
  std::array<double, 3> start{};
  for (int a = 0; a < 3; ++a) {
    count[a] = std::max(1, static_cast<int>(std::floor(dims[a] / spacing + 1e-9)));
    start[a] = lo[a] + 0.5 * (dims[a] - (count[a] - 1) * spacing);
  }
  std::vector<Vec3> points;
  for (int k = 0; k < count[2]; ++k) {
    for (int j = 0; j < count[1]; ++j) {
      for (int i = 0; i < count[0]; ++i) {
        const Vec3 p(start[0] + i * spacing, start[1] + j * spacing, start[2] + k * spacing);
        if (inside_with_margin(room, p, margin)) points.push_back(p);
      }
    }
  }
  if (points.empty()) fail(ErrorCode::EmptyGrid, "no grid point survives the margin");
  return points;
}

Cloud generate_train_dev_cloud(const Room& room, std::span<const Vec3> grid, double spacing,
                               std::size_t n_total, CloudRatios ratios, double margin,
                               std::uint64_t seed) {
  require(ratios.train >= 0.0 && ratios.dev >= 0.0, "cloud ratios must be nonnegative");
  require(std::abs(ratios.train + ratios.dev - 1.0) < 1e-9, "train and dev ratios must sum to 1");
  require(margin >= 0.0, "cloud margin must be nonnegative");
  const double min_gap = spacing / 4.0;
  const Vec3 lo = room.min_corner();
  const Vec3 hi = room.max_corner();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::uniform_real_distribution<double> uz(lo.z(), hi.z());

  std::vector<Vec3> points;
  points.reserve(n_total);
  const std::size_t max_attempts = 1000 * n_total + 10000;
  std::size_t attempts = 0;
  while (points.size() < n_total) {
    if (++attempts > max_attempts) {
      fail(ErrorCode::SamplingExhausted, "could not place " + std::to_string(n_total) + " cloud points");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    const Vec3 p(x, y, z);
    if (!inside_with_margin(room, p, margin)) continue;
    bool near_node = false;
    for (const Vec3& g : grid) {
      if ((g - p).norm() < min_gap) {
        near_node = true;
        break;
      }
    }
    if (near_node) continue;
    points.push_back(p);
  }

  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n_total) * ratios.train));
  Cloud cloud;
  cloud.train.assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(n_train));
  cloud.dev.assign(points.begin() + static_cast<std::ptrdiff_t>(n_train), points.end());
  return cloud;
}

PositionSet make_position_set(std::vector<Vec3> grid, Cloud cloud) {
  PositionSet set;
  const double total = static_cast<double>(grid.size() + cloud.train.size() + cloud.dev.size());
  set.test_ratio = total > 0 ? static_cast<double>(grid.size()) / total : 1.0;
  set.train_ratio = total > 0 ? static_cast<double>(cloud.train.size()) / total : 0.0;
  set.dev_ratio = total > 0 ? static_cast<double>(cloud.dev.size()) / total : 0.0;
  set.test_grid = std::move(grid);
  set.train_cloud = std::move(cloud.train);
  set.dev_cloud = std::move(cloud.dev);
  return set;
}

}  // namespace acousim
