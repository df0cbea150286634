#include "acousim/simulation.hpp"

#include "acousim/dsp.hpp"
#include "acousim/error.hpp"
#include "acousim/random.hpp"
#include "acousim/signal.hpp"

#include <algorithm>
#include <cmath>

namespace acousim {

SimulationMode parse_simulation_mode(std::string_view s) {
  if (s == "ism") return SimulationMode::ism;
  if (s == "hybrid") return SimulationMode::hybrid;
  fail(ErrorCode::InvalidArgument, "unknown simulation mode '" + std::string(s) + "' (ism|hybrid)");
}

const char* to_string(SimulationMode m) { return m == SimulationMode::ism ? "ism" : "hybrid"; }

std::vector<Rir> simulate_rirs(const Room& room, const Speaker& speaker, std::span<const Microphone> mics,
                               const SimulationOptions& opts) {
  require(opts.sim_rate_hz > 0.0, "sim_rate must be positive");
  require(opts.rir_duration_s > 0.0, "rir_duration must be positive");
  require(opts.max_order >= 0, "max_order must be nonnegative");
  require(room.contains(speaker.position), "speaker '" + speaker.id + "' is not inside the room");
  for (const Microphone& m : mics) require(room.contains(m.position), "microphone '" + m.id + "' is not inside the room");
  if (!room.is_shoebox()) {
    if (!room.uniform_material() && !opts.allow_mixed_materials) {
      fail(ErrorCode::MixedMaterialsUnsupported,
           "per-surface materials in non-shoebox rooms need simulation.experimental_mixed_materials");
    }
    if (!speaker.directivity.omnidirectional()) {
      fail(ErrorCode::DirectionalTransducerUnsupported, "directional speakers need a shoebox room");
    }
  }

  const double fs = opts.sim_rate_hz;
  const std::vector<double> bands = simulation_bands(fs);
  const auto length = static_cast<std::size_t>(std::ceil(opts.rir_duration_s * fs - 1e-9));
  const int ism_order = opts.mode == SimulationMode::hybrid ? std::min(opts.max_order, kHybridIsmOrder) : opts.max_order;

  std::vector<RirAccumulator> acc;
  acc.reserve(mics.size());
  for (std::size_t m = 0; m < mics.size(); ++m) acc.emplace_back(fs, length, bands, room.environment());
  std::vector<double> farthest(mics.size(), 0.0);

  if (room.is_shoebox()) {
    for_each_shoebox_image(room, speaker.position, ism_order, bands, [&](const ShoeboxImage& img) {
      for (std::size_t m = 0; m < mics.size(); ++m) {
        acc[m].add_image(img.position, img.band_gain, img.mirror, speaker, mics[m]);
        farthest[m] = std::max(farthest[m], (img.position - mics[m].position).norm());
      }
    });
  } else {
    for (std::size_t m = 0; m < mics.size(); ++m) {
      for (const ImageSource& img : enumerate_images_general(room, speaker.position, mics[m].position, ism_order, bands)) {
        acc[m].add_image(img, speaker, mics[m]);
        farthest[m] = std::max(farthest[m], (img.position - mics[m].position).norm());
      }
    }
  }

  if (opts.mode == SimulationMode::hybrid) {
    RayTracingOptions rt;
    rt.n_rays = opts.rays;
    rt.mic_radius = opts.mic_radius;
    rt.energy_cutoff = opts.energy_cutoff;
    rt.max_time_s = opts.rir_duration_s;
    rt.min_reflections = ism_order + 1;
    rt.seed = derive_seed(opts.seed, {0});
    const std::vector<RayHistogram> hist = trace_rays(room, speaker, mics, rt, fs, bands);
    const double c = speed_of_sound(room.environment().temperature_c);
    for (std::size_t m = 0; m < mics.size(); ++m) {
      acc[m].add_tail(hist[m], farthest[m] / c, derive_seed(opts.seed, {1, m}));
    }
  }

  const FilterBank bank(fs, bands);
  std::vector<Rir> out;
  out.reserve(mics.size());
  for (const RirAccumulator& a : acc) out.push_back(a.finish(bank));
  return out;
}

std::vector<Channel> simulate_room(const Room& room, std::span<const Speaker> speakers,
                                   std::span<const Microphone> mics, std::span<const double> emitted,
                                   const SimulationOptions& opts) {
  require(!emitted.empty(), "emitted signal is empty");
  require(opts.capture_duration_s > 0.0, "capture_duration must be positive");
  const auto capture = static_cast<std::size_t>(std::ceil(opts.capture_duration_s * opts.sim_rate_hz - 1e-9));
  std::vector<Channel> out;
  for (std::size_t s = 0; s < speakers.size(); ++s) {
    SimulationOptions per = opts;
    per.seed = derive_seed(opts.seed, {s});
    std::vector<Rir> rirs = simulate_rirs(room, speakers[s], mics, per);
    for (std::size_t m = 0; m < mics.size(); ++m) {
      std::vector<double> full = dsp::convolve(emitted, rirs[m].samples);
      full.resize(capture, 0.0);
      Channel ch;
      ch.speaker = s;
      ch.mic = m;
      ch.received = resample(full, opts.sim_rate_hz, mics[m].sample_rate_hz);
      ch.rir = std::move(rirs[m]);
      out.push_back(std::move(ch));
    }
  }
  return out;
}

}  // namespace acousim
