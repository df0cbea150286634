#pragma once

#include "acousim/rir.hpp"
#include "acousim/scene.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace acousim {

enum class SimulationMode { ism, hybrid };

SimulationMode parse_simulation_mode(std::string_view s);
const char* to_string(SimulationMode m);

struct SimulationOptions {
  SimulationMode mode = SimulationMode::ism;
  int max_order = 10;
  double sim_rate_hz = 250000.0;
  double rir_duration_s = 0.1;
  double capture_duration_s = 0.1;
  std::size_t rays = 10000;
  double mic_radius = 0.25;
  double energy_cutoff = 1e-7;
  bool allow_mixed_materials = false;  // non-shoebox ISM with per-surface materials
  std::uint64_t seed = 0;
};

/// Order used for the deterministic early part in hybrid mode.
inline constexpr int kHybridIsmOrder = 2;

struct Channel {
  std::size_t speaker = 0;
  std::size_t mic = 0;
  Rir rir;
  std::vector<double> received;  // at the microphone rate
};

/// RIR for every speaker/microphone pair at the simulation rate.
std::vector<Rir> simulate_rirs(const Room& room, const Speaker& speaker, std::span<const Microphone> mics,
                               const SimulationOptions& opts);

/// RIRs plus the emitted signal convolved, truncated to the capture window
/// and resampled to each microphone's rate.
std::vector<Channel> simulate_room(const Room& room, std::span<const Speaker> speakers,
                                   std::span<const Microphone> mics, std::span<const double> emitted,
                                   const SimulationOptions& opts);

}  // namespace acousim
