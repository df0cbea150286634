#pragma once

#include "acousim/propagation.hpp"
#include "acousim/scene.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace acousim {

using Mat3 = Eigen::Matrix3d;

/// One virtual source. `band_gain` is the product of per-reflection
/// amplitude factors sqrt(1 - alpha) per band. `mirror` maps the direction of
/// the final leg (image toward receiver) to the emission direction at the
/// real source.
struct ImageSource {
  Vec3 position = Vec3::Zero();
  int order = 0;
  std::vector<int> surface_sequence;
  std::vector<double> band_gain;
  Mat3 mirror = Mat3::Identity();
};

Vec3 emission_direction(const ImageSource& image, const Vec3& receiver);

/// Lightweight view passed to shoebox visitors; `band_gain` is only valid
/// during the callback.
struct ShoeboxImage {
  Vec3 position = Vec3::Zero();
  int order = 0;
  std::array<int, 3> lattice{};
  std::span<const double> band_gain;
  Mat3 mirror = Mat3::Identity();
};

/// Visits every lattice image with |i| + |j| + |k| <= max_order.
void for_each_shoebox_image(const Room& room, const Vec3& source, int max_order,
                            std::span<const double> bands,
                            const std::function<void(const ShoeboxImage&)>& visit);

/// Materialized shoebox images. Surface sequences list reflections per axis
/// (x, then y, then z), alternating faces; the order inside a sequence carries
/// no path meaning.
std::vector<ImageSource> enumerate_images_shoebox(const Room& room, const Vec3& source, int max_order,
                                                  std::span<const double> bands);

/// Depth-first mirroring over all surfaces with back-traced visibility toward
/// `receiver`. Only audible images are returned, including the direct path
/// when it is unobstructed.
std::vector<ImageSource> enumerate_images_general(const Room& room, const Vec3& source, const Vec3& receiver,
                                                  int max_order, std::span<const double> bands);

}  // namespace acousim
