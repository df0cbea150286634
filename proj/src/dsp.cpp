#include "acousim/dsp.hpp"

#include "acousim/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

namespace acousim::dsp {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::size_t kDirectLimit = 64;

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::size_t good_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  std::size_t best = next_pow2(n);
  for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v <<= 1;
      best = std::min(best, v);
    }
  }
  return best;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  require(n >= 1, "fft size must be positive");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n_);
  auto* spec = fftw_alloc_complex(n_ / 2 + 1);
  spec_ = spec;
  if (!real_ || !spec) fail(ErrorCode::InvalidArgument, "fftw allocation failed");
  fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  require(in.size() <= n_, "fft input longer than transform size");
  std::copy(in.begin(), in.end(), real_);
  std::fill(real_ + in.size(), real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  out.resize(spectrum_size());
  std::memcpy(static_cast<void*>(out.data()), spec_, spectrum_size() * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  require(in.size() == spectrum_size(), "inverse fft expects n/2 + 1 bins");
  std::memcpy(spec_, in.data(), spectrum_size() * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(inv_));
  out.resize(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t n = a.size() + b.size() - 1;
  std::vector<double> out(n, 0.0);
  if (std::min(a.size(), b.size()) <= kDirectLimit) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  }
  RealFft fft(good_fft_size(n));
  std::vector<std::complex<double>> fa;
  std::vector<std::complex<double>> fb;
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> full;
  fft.inverse(fa, full);
  std::copy(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n), out.begin());
  return out;
}

std::vector<double> correlate(std::span<const double> x, std::span<const double> t) {
  if (x.empty()) return {};
  require(!t.empty(), "correlation template is empty");
  std::vector<double> rev(t.rbegin(), t.rend());
  const std::vector<double> full = convolve(x, rev);
  const std::size_t shift = t.size() - 1;
  return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(shift),
                             full.begin() + static_cast<std::ptrdiff_t>(shift + x.size()));
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  template <class It>
  void run(It first, It last) const {
    double z1 = 0.0;
    double z2 = 0.0;
    for (auto it = first; it != last; ++it) {
      const double in = *it;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      *it = out;
    }
  }
};

// Bilinear-transformed second-order Butterworth section.
Biquad butterworth(double cutoff_hz, double sample_rate_hz, bool high) {
  require(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_rate_hz, "filter cutoff must lie in (0, fs/2)");
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  const double a1 = 2.0 * (k * k - 1.0) * norm;
  const double a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  if (high) return {norm, -2.0 * norm, norm, a1, a2};
  const double b0 = k * k * norm;
  return {b0, 2.0 * b0, b0, a1, a2};
}

}  // namespace

std::vector<double> zero_phase_lowpass(std::span<const double> x, double cutoff_hz, double sample_rate_hz) {
  const Biquad f = butterworth(cutoff_hz, sample_rate_hz, false);
  std::vector<double> y(x.begin(), x.end());
  f.run(y.begin(), y.end());
  f.run(y.rbegin(), y.rend());
  return y;
}

void highpass_inplace(std::span<double> x, double cutoff_hz, double sample_rate_hz) {
  const Biquad f = butterworth(cutoff_hz, sample_rate_hz, true);
  f.run(x.begin(), x.end());
}

}  // namespace acousim::dsp
