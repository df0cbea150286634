#pragma once

#include "acousim/propagation.hpp"
#include "acousim/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace acousim {

struct RayTracingOptions {
  std::size_t n_rays = 10000;
  double mic_radius = 0.25;
  double energy_cutoff = 1e-7;  // relative to emitted energy, per band
  double max_time_s = 0.1;
  int min_reflections = 0;      // rays with fewer reflections are not logged
  std::uint64_t seed = 0;
};

/// Energy arriving at a receiver, binned at `sample_rate_hz`, one row per
/// band. Values are energies of the pressure response (sum of squared
/// amplitudes per bin).
struct RayHistogram {
  double sample_rate_hz = 0.0;
  std::vector<double> bands;
  std::vector<std::vector<double>> energy;  // [band][bin]
  std::size_t rays = 0;

  std::size_t bins() const { return energy.empty() ? 0 : energy.front().size(); }
  double total(std::size_t band) const;
};

/// Stochastic specular ray tracing from an omnidirectional speaker toward
/// spherical receivers. Requires uniform materials and omnidirectional
/// transducers.
std::vector<RayHistogram> trace_rays(const Room& room, const Speaker& speaker,
                                     std::span<const Microphone> mics, const RayTracingOptions& opts,
                                     double sample_rate_hz, std::span<const double> bands);

}  // namespace acousim
