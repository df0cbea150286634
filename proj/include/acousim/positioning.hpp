#pragma once

#include "acousim/geometry.hpp"
#include "acousim/signal.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acousim {

enum class TofMode { max, prominence };

TofMode parse_tof_mode(std::string_view s);
const char* to_string(TofMode m);

struct TofOptions {
  TofMode mode = TofMode::max;
  double min_prominence = 0.5;  // fraction of the envelope maximum
  bool parabolic = false;
};

struct TofEstimate {
  double index = 0.0;  // fractional when parabolic interpolation is on
  double tof_s = 0.0;
  double prominence = 0.0;
};

/// Peak prominence of local maximum `i`: height above the higher of the two
/// lowest points reached before climbing above x[i] on either side.
double peak_prominence(std::span<const double> x, std::size_t i);

/// Matched-filter index k is the template onset, so tof = k / rate.
TofEstimate estimate_tof(const CompressedEnvelope& env, const TofOptions& opts = {});

struct RangeEstimate {
  std::string anchor_id;
  double range_m = 0.0;
  double tof_s = 0.0;
  double peak_quality = 0.0;
};

RangeEstimate make_range(std::string anchor_id, const TofEstimate& tof, double speed_of_sound);

struct Anchor {
  std::string id;
  Vec3 position = Vec3::Zero();
};

class AnchorSet {
 public:
  explicit AnchorSet(std::vector<Anchor> anchors);
  std::span<const Anchor> anchors() const noexcept { return anchors_; }
  std::size_t size() const noexcept { return anchors_.size(); }
  std::vector<Vec3> positions() const;
  /// Smallest over largest singular value of the centered anchor matrix.
  double planarity() const;
  bool coplanar(double tol = 1e-9) const { return planarity() < tol; }

 private:
  std::vector<Anchor> anchors_;
};

enum class Method { intersections, bancroft, beck, cheung, gauss_newton };

Method parse_method(std::string_view s);
const char* to_string(Method m);
std::vector<Method> all_methods();

struct PositionEstimate {
  Vec3 position = Vec3::Zero();
  Method method = Method::gauss_newton;
  double residual_rms = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// sum_i (|x - a_i| - r_i)^2
double range_cost(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x);
/// sum_i (|x - a_i|^2 - r_i^2)^2
double squared_range_cost(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x);
double residual_rms(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x);

PositionEstimate multilaterate(std::span<const Vec3> anchors, std::span<const double> ranges, Method method);

/// Matches ranges to anchors by id.
PositionEstimate multilaterate(const AnchorSet& anchors, std::span<const RangeEstimate> ranges, Method method);

}  // namespace acousim
