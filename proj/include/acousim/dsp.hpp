#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace acousim::dsp {

/// Smallest 2^a 3^b 5^c >= n.
std::size_t good_fft_size(std::size_t n);
std::size_t next_pow2(std::size_t n);

/// Real-to-complex FFT of fixed size backed by FFTW. Plans are created under a
/// global lock; execution is thread-safe per instance.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  /// Zero-pads `in` to size(). Output has spectrum_size() bins.
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  /// Inverse including the 1/n scale. Output has size() samples.
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Full linear convolution, length a + b - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// out[k] = sum_n x[k + n] t[n] for k in [0, |x|), x zero beyond its end.
std::vector<double> correlate(std::span<const double> x, std::span<const double> t);

double energy(std::span<const double> x);

/// Second-order Butterworth low-pass run forward then backward.
std::vector<double> zero_phase_lowpass(std::span<const double> x, double cutoff_hz, double sample_rate_hz);

/// Causal second-order Butterworth high-pass.
void highpass_inplace(std::span<double> x, double cutoff_hz, double sample_rate_hz);

}  // namespace acousim::dsp
