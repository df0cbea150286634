#pragma once

#include "acousim/geometry.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acousim {

/// Temperature in degrees Celsius, humidity as a fraction in [0, 1].
struct Environment {
  double temperature_c = 20.0;
  double relative_humidity = 0.5;
  bool air_absorption = true;
};

void validate(const Environment& env);

/// Frequency-banded energy absorption coefficients. A material built with
/// `flat` absorbs equally at every frequency.
class Material {
 public:
  Material() = default;
  Material(std::string name, std::vector<double> band_centers_hz, std::vector<double> coefficients);

  static Material flat(std::string name, double absorption);

  const std::string& name() const noexcept { return name_; }
  std::span<const double> band_centers() const noexcept { return centers_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  bool is_flat() const noexcept { return centers_.empty(); }

  /// Coefficient of the band whose center is nearest in log-frequency.
  double absorption_at(double frequency_hz) const;

  /// True when the octave bands span [low_hz, high_hz].
  bool covers(double low_hz, double high_hz) const;

  bool same_absorption(const Material& other) const;

 private:
  std::string name_;
  std::vector<double> centers_;
  std::vector<double> coefficients_;
};

/// Throws ValidationError for names not in the library.
Material builtin_material(std::string_view name);
std::vector<std::string> builtin_material_names();

/// Cardioid family: gain = p + (1 - p) cos(theta). p = 1 is omnidirectional,
/// 0.5 cardioid, 0.25 hypercardioid, 0 figure-eight.
struct Directivity {
  double pattern = 1.0;
  Vec3 orientation = Vec3::UnitZ();

  bool omnidirectional() const noexcept { return pattern == 1.0; }
};

void validate(const Directivity& d);

/// Amplitude gain toward `direction_to_target` (unit vector).
double directivity_gain(const Directivity& d, const Vec3& direction_to_target);

struct Speaker {
  std::string id;
  Vec3 position = Vec3::Zero();
  Directivity directivity;
};

struct Microphone {
  std::string id;
  Vec3 position = Vec3::Zero();
  Directivity directivity;
  double sample_rate_hz = 250000.0;
};

enum class SurfaceKind { wall, floor, ceiling };

struct Surface {
  int id = 0;
  SurfaceKind kind = SurfaceKind::wall;
  std::vector<Vec3> corners;
  Vec3 normal = Vec3::Zero();  // outward
  double offset = 0.0;         // normal . x == offset on the plane
  double area = 0.0;
  Material material;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  Vec3 mirror(const Vec3& p) const { return p - 2.0 * signed_distance(p) * normal; }
};

/// Walls follow floor vertex order (wall i spans vertex i to i+1), then the
/// floor, then the ceiling. `materials` holds one entry (applied to every
/// surface) or exactly one per surface. Leave it empty when rt60_target drives
/// absorption.
struct RoomSpec {
  std::vector<Vec2> floor_vertices;
  double height = 0.0;
  std::vector<Material> materials;
  std::optional<double> rt60_target;
  Environment environment;
};

struct SurfaceHit {
  int surface = -1;
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

/// A validated flat-ceiling polygonal prism. Immutable once built.
class Room {
 public:
  std::span<const Vec2> floor() const noexcept { return floor_; }
  double height() const noexcept { return height_; }
  std::span<const Surface> surfaces() const noexcept { return surfaces_; }
  const Surface& surface(int id) const { return surfaces_.at(static_cast<std::size_t>(id)); }
  std::size_t wall_count() const noexcept { return floor_.size(); }

  double volume() const noexcept { return volume_; }
  double total_area() const noexcept { return total_area_; }
  double floor_area() const noexcept { return floor_area_; }

  bool is_shoebox() const noexcept { return shoebox_; }
  const Vec3& min_corner() const noexcept { return min_corner_; }
  const Vec3& max_corner() const noexcept { return max_corner_; }
  Vec3 dimensions() const { return max_corner_ - min_corner_; }
  Vec3 center() const noexcept { return center_; }

  const Environment& environment() const noexcept { return environment_; }
  std::optional<double> rt60_target() const noexcept { return rt60_target_; }
  std::optional<int> recommended_max_order() const noexcept { return recommended_order_; }

  /// True when every surface has identical absorption.
  bool uniform_material() const;

  /// Shoebox only: surface on the low (side 0) or high (side 1) end of an axis.
  int shoebox_surface(int axis, int side) const;

  bool contains(const Vec3& p) const;
  /// Distance from an interior point to the closest boundary surface.
  double clearance(const Vec3& p) const;

  /// True when `p`, assumed on the surface plane, lies within the surface.
  bool surface_contains(int surface_id, const Vec3& p, double tol = 1e-9) const;

  /// Nearest surface hit along origin + t * direction, t in (t_min, t_max).
  std::optional<SurfaceHit> first_hit(const Vec3& origin, const Vec3& direction, double t_min,
                                      double t_max, int skip_surface = -1) const;

  /// True when the open segment (a, b) passes through any surface other than
  /// the skipped ones, with `eps` trimmed from both ends.
  bool segment_blocked(const Vec3& a, const Vec3& b, int skip_a, int skip_b, double eps = 1e-9) const;

 private:
  friend Room validate_room(const RoomSpec& spec);

  std::vector<Vec2> floor_;
  double height_ = 0.0;
  std::vector<Surface> surfaces_;
  double volume_ = 0.0;
  double total_area_ = 0.0;
  double floor_area_ = 0.0;
  bool shoebox_ = false;
  double orientation_ = 1.0;
  Vec3 min_corner_ = Vec3::Zero();
  Vec3 max_corner_ = Vec3::Zero();
  Vec3 center_ = Vec3::Zero();
  Environment environment_;
  std::optional<double> rt60_target_;
  std::optional<int> recommended_order_;
  std::vector<double> wall_lengths_;
};

/// Builds wall planes, outward normals, areas and volume. When rt60_target is
/// set the surfaces receive the uniform absorption from inverse_sabine.
Room validate_room(const RoomSpec& spec);

inline constexpr double kSabineConstant = 0.1611;  // s/m

struct SabineResult {
  double absorption = 0.0;
  int max_order = 0;
};

SabineResult inverse_sabine(double rt60, const Room& room);

/// Forward Sabine formula for a uniform absorption.
double sabine_rt60(double absorption, const Room& room);

bool point_in_room(const Vec3& p, const Room& room);

/// Cell-centered lattice over the bounding box, filtered to points at least
/// `margin` from every surface.
std::vector<Vec3> generate_test_grid(const Room& room, double spacing, double margin);

struct CloudRatios {
  double train = 0.8;
  double dev = 0.2;
};

struct Cloud {
  std::vector<Vec3> train;
  std::vector<Vec3> dev;
};

/// Uniform rejection sampling in the margin-shrunk interior, keeping at least
/// spacing/4 from every grid node.
Cloud generate_train_dev_cloud(const Room& room, std::span<const Vec3> grid, double spacing,
                               std::size_t n_total, CloudRatios ratios, double margin,
                               std::uint64_t seed);

struct PositionSet {
  std::vector<Vec3> test_grid;
  std::vector<Vec3> train_cloud;
  std::vector<Vec3> dev_cloud;
  double train_ratio = 0.0;
  double dev_ratio = 0.0;
  double test_ratio = 1.0;
};

PositionSet make_position_set(std::vector<Vec3> grid, Cloud cloud);

}  // namespace acousim
