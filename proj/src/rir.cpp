#include "acousim/rir.hpp"

#include "acousim/dsp.hpp"
#include "acousim/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace acousim {

FilterBank::FilterBank(double sample_rate_hz, std::vector<double> centers_hz)
    : fs_(sample_rate_hz), centers_(std::move(centers_hz)) {
  require(fs_ > 0.0, "filter bank sample rate must be positive");
  require(!centers_.empty(), "filter bank needs at least one band");
  require(std::is_sorted(centers_.begin(), centers_.end()), "band centers must be ascending");
  n_ = dsp::next_pow2(static_cast<std::size_t>(std::ceil(4.0 * fs_ / centers_.front())));
  dsp::RealFft fft(n_);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  std::vector<double> circ;
  for (std::size_t b = 0; b < centers_.size(); ++b) {
    for (std::size_t k = 0; k < spec.size(); ++k) {
      spec[k] = response(b, static_cast<double>(k) * fs_ / static_cast<double>(n_));
    }
    fft.inverse(spec, circ);
    std::vector<double> h(n_);
    for (std::size_t i = 0; i < n_; ++i) h[i] = circ[(i + n_ / 2) % n_];
    energy_.push_back(dsp::energy(h));
    filters_.push_back(std::move(h));
  }
}

double FilterBank::response(std::size_t band, double frequency_hz) const {
  const std::size_t nb = centers_.size();
  require(band < nb, "band index out of range");
  if (nb == 1) return 1.0;
  if (frequency_hz <= centers_.front()) return band == 0 ? 1.0 : 0.0;
  if (frequency_hz >= centers_.back()) return band == nb - 1 ? 1.0 : 0.0;
  const auto upper = std::upper_bound(centers_.begin(), centers_.end(), frequency_hz);
  const auto j = static_cast<std::size_t>(upper - centers_.begin()) - 1;
  const double x = std::log(frequency_hz / centers_[j]) / std::log(centers_[j + 1] / centers_[j]);
  const double s = std::sin(0.5 * std::numbers::pi * x);
  if (band == j) return 1.0 - s * s;
  if (band == j + 1) return s * s;
  return 0.0;
}

std::vector<double> FilterBank::apply(const std::vector<std::vector<double>>& band_signals) const {
  require(band_signals.size() == centers_.size(), "one signal per band expected");
  const std::size_t len = band_signals.front().size();
  for (const auto& s : band_signals) require(s.size() == len, "band signals must share one length");
  std::vector<double> out(len, 0.0);
  if (len == 0) return out;

  dsp::RealFft fft(dsp::good_fft_size(len + n_ - 1));
  std::vector<std::complex<double>> acc(fft.spectrum_size(), 0.0);
  std::vector<std::complex<double>> fx;
  std::vector<std::complex<double>> fh;
  bool any = false;
  for (std::size_t b = 0; b < band_signals.size(); ++b) {
    const auto& s = band_signals[b];
    if (std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; })) continue;
    any = true;
    fft.forward(s, fx);
    fft.forward(filters_[b], fh);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += fx[k] * fh[k];
  }
  if (!any) return out;
  std::vector<double> full;
  fft.inverse(acc, full);
  std::copy_n(full.begin() + static_cast<std::ptrdiff_t>(delay()), len, out.begin());
  return out;
}

void add_fractional_impulse(std::span<double> buffer, double delay_samples, double amplitude) {
  const double nearest = std::round(delay_samples);
  if (std::abs(delay_samples - nearest) < 1e-9) {
    if (nearest >= 0.0 && nearest < static_cast<double>(buffer.size())) {
      buffer[static_cast<std::size_t>(nearest)] += amplitude;
    }
    return;
  }
  const auto base = static_cast<long long>(std::floor(delay_samples));
  constexpr double half = kFractionalDelayHalfWidth + 1;
  for (long long n = base - kFractionalDelayHalfWidth; n <= base + kFractionalDelayHalfWidth; ++n) {
    if (n < 0 || n >= static_cast<long long>(buffer.size())) continue;
    const double x = static_cast<double>(n) - delay_samples;
    const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * x / half));
    const double px = std::numbers::pi * x;
    buffer[static_cast<std::size_t>(n)] += amplitude * window * std::sin(px) / px;
  }
}

RirAccumulator::RirAccumulator(double sample_rate_hz, std::size_t length, std::span<const double> bands,
                               const Environment& env)
    : fs_(sample_rate_hz),
      c_(speed_of_sound(env.temperature_c)),
      bands_(bands.begin(), bands.end()),
      air_(AirAbsorptionModel::from_environment(env, bands)),
      common_(length, 0.0),
      band_(bands.size()),
      scratch_(bands.size()) {
  require(fs_ > 0.0, "RIR sample rate must be positive");
  require(!bands_.empty(), "RIR synthesis needs at least one band");
}

std::vector<double>& RirAccumulator::band_buffer(std::size_t band) {
  auto& buf = band_[band];
  if (buf.empty()) buf.assign(common_.size(), 0.0);
  return buf;
}

void RirAccumulator::add_image(const Vec3& image_position, std::span<const double> band_gain, const Mat3& mirror,
                               const Speaker& speaker, const Microphone& mic) {
  require(band_gain.size() == bands_.size(), "image gain has the wrong band count");
  const Vec3 leg = mic.position - image_position;
  const double d = leg.norm();
  if (d < 1e-9) fail(ErrorCode::MicAtImagePosition, "microphone coincides with an image source");
  const double delay = d / c_ * fs_;
  if (delay - kFractionalDelayHalfWidth >= static_cast<double>(common_.size())) return;
  const Vec3 u = leg / d;
  const double g = directivity_gain(speaker.directivity, mirror * u) * directivity_gain(mic.directivity, -u) /
                   (4.0 * std::numbers::pi * d);
  if (g == 0.0) return;
  bool uniform = true;
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    scratch_[b] = band_gain[b] * std::exp(-air_.coefficients[b] * d);
    if (scratch_[b] != scratch_[0]) uniform = false;
  }
  if (uniform) {
    add_fractional_impulse(common_, delay, g * scratch_[0]);
    return;
  }
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    if (scratch_[b] != 0.0) add_fractional_impulse(band_buffer(b), delay, g * scratch_[b]);
  }
}

void RirAccumulator::add_tail(const RayHistogram& hist, double start_s, std::uint64_t seed) {
  require(hist.bands.size() == bands_.size(), "histogram band count differs from the RIR");
  require(std::abs(hist.sample_rate_hz - fs_) < 1e-9 * fs_, "histogram rate differs from the RIR rate");
  const FilterBank probe(fs_, bands_);
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1e-3 * fs_)));
  const auto start = static_cast<std::size_t>(std::max(0.0, std::ceil(start_s * fs_)));
  const std::size_t stop = std::min(common_.size(), hist.bins());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(window);
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    const double norm = probe.filter_energy(b);
    for (std::size_t w0 = start; w0 < stop; w0 += window) {
      const std::size_t w1 = std::min(stop, w0 + window);
      double target = 0.0;
      for (std::size_t i = w0; i < w1; ++i) target += hist.energy[b][i];
      // Draw even for silent windows so the stream does not depend on content.
      double e = 0.0;
      for (std::size_t i = 0; i < w1 - w0; ++i) {
        noise[i] = gauss(rng);
        e += noise[i] * noise[i];
      }
      if (target <= 0.0 || e <= 0.0) continue;
      const double scale = std::sqrt(target / (norm * e));
      auto& buf = band_buffer(b);
      for (std::size_t i = 0; i < w1 - w0; ++i) buf[w0 + i] += scale * noise[i];
    }
  }
}

Rir RirAccumulator::finish(const FilterBank& bank) const {
  require(bank.band_count() == bands_.size(), "filter bank band count differs from the RIR");
  Rir rir;
  rir.sample_rate_hz = fs_;
  rir.samples = common_;
  const bool any_band = std::any_of(band_.begin(), band_.end(), [](const auto& v) { return !v.empty(); });
  if (any_band) {
    std::vector<std::vector<double>> signals(band_.size());
    for (std::size_t b = 0; b < band_.size(); ++b) {
      signals[b] = band_[b].empty() ? std::vector<double>(common_.size(), 0.0) : band_[b];
    }
    const std::vector<double> filtered = bank.apply(signals);
    for (std::size_t i = 0; i < rir.samples.size(); ++i) rir.samples[i] += filtered[i];
  }
  dsp::highpass_inplace(rir.samples, kRirHighpassHz, fs_);
  return rir;
}

}  // namespace acousim
