#include "acousim/image_source.hpp"

#include "acousim/error.hpp"

#include <cmath>
#include <cstdlib>

namespace acousim {

Vec3 emission_direction(const ImageSource& image, const Vec3& receiver) {
  const Vec3 leg = receiver - image.position;
  const double d = leg.norm();
  if (d < 1e-9) fail(ErrorCode::MicAtImagePosition, "receiver coincides with an image source");
  return image.mirror * (leg / d);
}

namespace {

std::vector<double> transmission(const Material& m, std::span<const double> bands) {
  std::vector<double> t(bands.size());
  for (std::size_t b = 0; b < bands.size(); ++b) t[b] = std::sqrt(1.0 - m.absorption_at(bands[b]));
  return t;
}

// Reflections off the low and high face of an axis for lattice index p.
std::array<int, 2> face_counts(int p) {
  if (p >= 0) return {p / 2, (p + 1) / 2};
  return {(-p + 1) / 2, (-p) / 2};
}

}  // namespace

void for_each_shoebox_image(const Room& room, const Vec3& source, int max_order,
                            std::span<const double> bands,
                            const std::function<void(const ShoeboxImage&)>& visit) {
  require(room.is_shoebox(), "shoebox image enumeration needs a shoebox room");
  require(max_order >= 0, "max_order must be nonnegative");
  require(room.contains(source), "source must lie strictly inside the room");
  const Vec3 lo = room.min_corner();
  const Vec3 dims = room.dimensions();
  const Vec3 rel = source - lo;
  const std::size_t nb = bands.size();

  // powers[axis][side][k * nb + b] = t^k
  std::array<std::array<std::vector<double>, 2>, 3> powers;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const std::vector<double> t = transmission(room.surface(room.shoebox_surface(axis, side)).material, bands);
      auto& table = powers[axis][side];
      table.assign(static_cast<std::size_t>(max_order + 2) * nb, 1.0);
      for (int k = 1; k <= max_order + 1; ++k) {
        for (std::size_t b = 0; b < nb; ++b) {
          table[static_cast<std::size_t>(k) * nb + b] = table[static_cast<std::size_t>(k - 1) * nb + b] * t[b];
        }
      }
    }
  }

  std::vector<double> gain(nb);
  ShoeboxImage img;
  for (int i = -max_order; i <= max_order; ++i) {
    const int rj = max_order - std::abs(i);
    for (int j = -rj; j <= rj; ++j) {
      const int rk = rj - std::abs(j);
      for (int k = -rk; k <= rk; ++k) {
        const std::array<int, 3> p{i, j, k};
        for (std::size_t b = 0; b < nb; ++b) gain[b] = 1.0;
        for (int axis = 0; axis < 3; ++axis) {
          const int n = p[axis];
          img.position[axis] = lo[axis] + n * dims[axis] + ((n & 1) ? dims[axis] - rel[axis] : rel[axis]);
          const auto counts = face_counts(n);
          for (int side = 0; side < 2; ++side) {
            const double* row = powers[axis][side].data() + static_cast<std::size_t>(counts[side]) * nb;
            for (std::size_t b = 0; b < nb; ++b) gain[b] *= row[b];
          }
        }
        img.order = std::abs(i) + std::abs(j) + std::abs(k);
        img.lattice = p;
        img.band_gain = gain;
        img.mirror = Vec3((i & 1) ? -1.0 : 1.0, (j & 1) ? -1.0 : 1.0, (k & 1) ? -1.0 : 1.0).asDiagonal();
        visit(img);
      }
    }
  }
}

std::vector<ImageSource> enumerate_images_shoebox(const Room& room, const Vec3& source, int max_order,
                                                  std::span<const double> bands) {
  std::vector<ImageSource> out;
  for_each_shoebox_image(room, source, max_order, bands, [&](const ShoeboxImage& s) {
    ImageSource img;
    img.position = s.position;
    img.order = s.order;
    img.band_gain.assign(s.band_gain.begin(), s.band_gain.end());
    img.mirror = s.mirror;
    for (int axis = 0; axis < 3; ++axis) {
      const int n = s.lattice[axis];
      // Positive indices start at the high face, negative ones at the low face.
      int side = n > 0 ? 1 : 0;
      for (int r = 0; r < std::abs(n); ++r) {
        img.surface_sequence.push_back(room.shoebox_surface(axis, side));
        side = 1 - side;
      }
    }
    out.push_back(std::move(img));
  });
  return out;
}

namespace {

struct Node {
  Vec3 position;
  int order = 0;
  int surface = -1;  // surface that generated this image
  int parent = -1;
  std::vector<double> gain;
  Mat3 mirror = Mat3::Identity();
};

class GeneralEnumerator {
 public:
  GeneralEnumerator(const Room& room, const Vec3& source, const Vec3& receiver, int max_order,
                    std::span<const double> bands)
      : room_(room), source_(source), receiver_(receiver), max_order_(max_order) {
    for (const Surface& s : room.surfaces()) transmission_.push_back(transmission(s.material, bands));
    Node root;
    root.position = source;
    root.gain.assign(bands.size(), 1.0);
    nodes_.push_back(std::move(root));
  }

  std::vector<ImageSource> run() {
    expand(0);
    return std::move(visible_);
  }

 private:
  void expand(int index) {
    if (visible(index)) emit(index);
    if (nodes_[static_cast<std::size_t>(index)].order >= max_order_) return;
    for (const Surface& s : room_.surfaces()) {
      const Node& cur = nodes_[static_cast<std::size_t>(index)];
      if (s.id == cur.surface) continue;
      // Only mirror images that sit on the interior side of the plane.
      if (s.signed_distance(cur.position) >= -1e-12) continue;
      Node child;
      child.position = s.mirror(cur.position);
      child.order = cur.order + 1;
      child.surface = s.id;
      child.parent = index;
      child.gain = cur.gain;
      const auto& t = transmission_[static_cast<std::size_t>(s.id)];
      for (std::size_t b = 0; b < child.gain.size(); ++b) child.gain[b] *= t[b];
      const Mat3 reflect = Mat3::Identity() - 2.0 * s.normal * s.normal.transpose();
      child.mirror = cur.mirror * reflect;
      nodes_.push_back(std::move(child));
      expand(static_cast<int>(nodes_.size()) - 1);
      nodes_.pop_back();
    }
  }

  bool visible(int index) const {
    Vec3 p = receiver_;
    int prev = -1;
    int idx = index;
    while (true) {
      const Node& n = nodes_[static_cast<std::size_t>(idx)];
      if (n.parent < 0) return !room_.segment_blocked(p, source_, prev, -1);
      const Surface& s = room_.surface(n.surface);
      const double da = s.signed_distance(p);
      const double db = s.signed_distance(n.position);
      if (!(da < 0.0 && db > 0.0)) return false;
      const double t = da / (da - db);
      const Vec3 q = p + t * (n.position - p);
      if (!room_.surface_contains(n.surface, q)) return false;
      if (room_.segment_blocked(p, q, prev, n.surface)) return false;
      p = q;
      prev = n.surface;
      idx = n.parent;
    }
  }

  void emit(int index) {
    const Node& n = nodes_[static_cast<std::size_t>(index)];
    ImageSource img;
    img.position = n.position;
    img.order = n.order;
    img.band_gain = n.gain;
    img.mirror = n.mirror;
    img.surface_sequence.resize(static_cast<std::size_t>(n.order));
    int idx = index;
    for (int r = n.order - 1; r >= 0; --r) {
      const Node& m = nodes_[static_cast<std::size_t>(idx)];
      img.surface_sequence[static_cast<std::size_t>(r)] = m.surface;
      idx = m.parent;
    }
    visible_.push_back(std::move(img));
  }

  const Room& room_;
  Vec3 source_;
  Vec3 receiver_;
  int max_order_;
  std::vector<std::vector<double>> transmission_;
  std::vector<Node> nodes_;
  std::vector<ImageSource> visible_;
};

}  // namespace

std::vector<ImageSource> enumerate_images_general(const Room& room, const Vec3& source, const Vec3& receiver,
                                                  int max_order, std::span<const double> bands) {
  require(max_order >= 0, "max_order must be nonnegative");
  require(room.contains(source), "source must lie strictly inside the room");
  require(room.contains(receiver), "receiver must lie strictly inside the room");
  GeneralEnumerator e(room, source, receiver, max_order, bands);
  return e.run();
}

}  // namespace acousim
