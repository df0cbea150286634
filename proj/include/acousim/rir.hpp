#pragma once

#include "acousim/image_source.hpp"
#include "acousim/propagation.hpp"
#include "acousim/ray_tracing.hpp"
#include "acousim/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace acousim {

/// Zero-phase octave filter bank whose responses sum to one at every
/// frequency. Adjacent bands cross over with sin^2 / cos^2 tapers in
/// log-frequency; the lowest band extends to DC and the highest to Nyquist.
class FilterBank {
 public:
  FilterBank(double sample_rate_hz, std::vector<double> centers_hz);

  double sample_rate_hz() const noexcept { return fs_; }
  std::span<const double> centers() const noexcept { return centers_; }
  std::size_t band_count() const noexcept { return centers_.size(); }
  /// FIR length; every filter is centered at delay().
  std::size_t length() const noexcept { return n_; }
  std::size_t delay() const noexcept { return n_ / 2; }
  std::span<const double> filter(std::size_t band) const { return filters_.at(band); }
  double filter_energy(std::size_t band) const { return energy_.at(band); }

  /// Design magnitude of one band at `frequency_hz`.
  double response(std::size_t band, double frequency_hz) const;

  /// Filters each band signal with its band filter, sums, and removes the
  /// filter delay. All inputs share one length, which the output keeps.
  std::vector<double> apply(const std::vector<std::vector<double>>& band_signals) const;

 private:
  double fs_;
  std::vector<double> centers_;
  std::size_t n_;
  std::vector<std::vector<double>> filters_;
  std::vector<double> energy_;
};

inline constexpr int kFractionalDelayHalfWidth = 40;

/// Adds amplitude * windowed-sinc centered at `delay_samples` (81 taps, Hann
/// window). Integer delays produce a single sample.
void add_fractional_impulse(std::span<double> buffer, double delay_samples, double amplitude);

struct Rir {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
};

/// Image amplitudes are all positive, so a dense late field sums to a slowly
/// varying offset that no transducer radiates. finish() removes it with a
/// high-pass at this corner.
inline constexpr double kRirHighpassHz = 20.0;

/// Accumulates propagation paths for one speaker/microphone pair. Paths with
/// the same gain in every band skip the filter bank.
class RirAccumulator {
 public:
  RirAccumulator(double sample_rate_hz, std::size_t length, std::span<const double> bands,
                 const Environment& env);

  /// Adds one image source: directivity of both transducers, spherical
  /// spreading, per-band reflection gain and air absorption.
  void add_image(const Vec3& image_position, std::span<const double> band_gain, const Mat3& mirror,
                 const Speaker& speaker, const Microphone& mic);
  void add_image(const ImageSource& image, const Speaker& speaker, const Microphone& mic) {
    add_image(image.position, image.band_gain, image.mirror, speaker, mic);
  }

  /// Band-limited Gaussian noise whose energy per 1 ms window follows the
  /// histogram, from `start_s` on.
  void add_tail(const RayHistogram& hist, double start_s, std::uint64_t seed);

  Rir finish(const FilterBank& bank) const;

  std::size_t length() const noexcept { return common_.size(); }

 private:
  std::vector<double>& band_buffer(std::size_t band);

  double fs_;
  double c_;
  std::vector<double> bands_;
  AirAbsorptionModel air_;
  std::vector<double> common_;
  std::vector<std::vector<double>> band_;
  std::vector<double> scratch_;
};

}  // namespace acousim
