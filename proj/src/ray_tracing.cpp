#include "acousim/ray_tracing.hpp"

#include "acousim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace acousim {

double RayHistogram::total(std::size_t band) const {
  double s = 0.0;
  for (double v : energy.at(band)) s += v;
  return s;
}

std::vector<RayHistogram> trace_rays(const Room& room, const Speaker& speaker,
                                     std::span<const Microphone> mics, const RayTracingOptions& opts,
                                     double sample_rate_hz, std::span<const double> bands) {
  if (!room.uniform_material()) {
    fail(ErrorCode::MixedMaterialsUnsupported, "ray tracing needs the same material on every surface");
  }
  if (!speaker.directivity.omnidirectional()) {
    fail(ErrorCode::DirectionalTransducerUnsupported, "ray tracing needs an omnidirectional speaker");
  }
  for (const Microphone& m : mics) {
    if (!m.directivity.omnidirectional()) {
      fail(ErrorCode::DirectionalTransducerUnsupported, "ray tracing needs omnidirectional microphones");
    }
  }
  require(opts.n_rays > 0, "n_rays must be positive");
  require(opts.mic_radius > 0.0, "mic_radius must be positive");
  require(opts.max_time_s > 0.0 && sample_rate_hz > 0.0, "ray tracing needs positive duration and rate");
  require(room.contains(speaker.position), "speaker must lie inside the room");

  const std::size_t nb = bands.size();
  const double c = speed_of_sound(room.environment().temperature_c);
  const AirAbsorptionModel air = AirAbsorptionModel::from_environment(room.environment(), bands);
  std::vector<std::vector<double>> keep(room.surfaces().size(), std::vector<double>(nb));
  for (const Surface& s : room.surfaces()) {
    for (std::size_t b = 0; b < nb; ++b) {
      keep[static_cast<std::size_t>(s.id)][b] = 1.0 - s.material.absorption_at(bands[b]);
    }
  }

  const auto n_bins = static_cast<std::size_t>(std::ceil(opts.max_time_s * sample_rate_hz)) + 1;
  std::vector<RayHistogram> out(mics.size());
  for (RayHistogram& h : out) {
    h.sample_rate_hz = sample_rate_hz;
    h.bands.assign(bands.begin(), bands.end());
    h.energy.assign(nb, std::vector<double>(n_bins, 0.0));
    h.rays = opts.n_rays;
  }

  const double max_path = c * opts.max_time_s;
  const double r2 = opts.mic_radius * opts.mic_radius;
  const double n_rays = static_cast<double>(opts.n_rays);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> e(nb);

  for (std::size_t ray = 0; ray < opts.n_rays; ++ray) {
    const double z = 1.0 - 2.0 * unit(rng);
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec3 dir(rho * std::cos(phi), rho * std::sin(phi), z);
    Vec3 pos = speaker.position;
    std::fill(e.begin(), e.end(), 1.0);
    double travel = 0.0;
    int reflections = 0;
    int last = -1;

    while (true) {
      const auto hit = room.first_hit(pos, dir, 1e-10, std::numeric_limits<double>::infinity(), last);
      if (!hit) break;
      const double seg = hit->t;
      if (reflections >= opts.min_reflections) {
        for (std::size_t m = 0; m < mics.size(); ++m) {
          const Vec3 v = mics[m].position - pos;
          const double proj = v.dot(dir);
          if (proj < 0.0 || proj > seg) continue;
          const double dist2 = v.squaredNorm();
          if (dist2 - proj * proj >= r2) continue;
          const double r = travel + std::sqrt(dist2);
          const auto bin = static_cast<std::size_t>(std::floor(r / c * sample_rate_hz + 0.5));
          if (bin >= n_bins) continue;
          const double frac = r > opts.mic_radius ? 0.5 * (1.0 - std::sqrt(1.0 - r2 / (r * r))) : 1.0;
          const double spread = 1.0 / (16.0 * std::numbers::pi * std::numbers::pi * r * r);
          const double scale = spread / (n_rays * frac);
          for (std::size_t b = 0; b < nb; ++b) {
            out[m].energy[b][bin] += e[b] * std::exp(-2.0 * air.coefficients[b] * r) * scale;
          }
        }
      }
      travel += seg;
      if (travel > max_path) break;
      const auto& k = keep[static_cast<std::size_t>(hit->surface)];
      double peak = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        e[b] *= k[b];
        peak = std::max(peak, e[b]);
      }
      ++reflections;
      if (peak < opts.energy_cutoff) break;
      const Vec3& nrm = room.surface(hit->surface).normal;
      dir = dir - 2.0 * dir.dot(nrm) * nrm;
      pos = hit->point;
      last = hit->surface;
    }
  }
  return out;
}

}  // namespace acousim
