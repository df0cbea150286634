#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace acousim {

/// Linear sweep from f_start to f_end over `duration` seconds.
struct ChirpSpec {
  double f_start_hz = 45000.0;
  double f_end_hz = 25000.0;
  double duration_s = 0.03;
  double amplitude = 1.0;
};

void validate(const ChirpSpec& spec);

/// s[n] = A sin(2 pi (f0 t + (f1 - f0) / (2T) t^2)), t = n / fs, n in [0, T fs).
std::vector<double> generate_chirp(const ChirpSpec& spec, double sample_rate_hz);

/// Rational polyphase resampling with a Kaiser-windowed sinc (80 dB stopband,
/// passband to 0.45 of the lower rate). Output length ceil(n * to / from).
std::vector<double> resample(std::span<const double> x, double from_rate_hz, double to_rate_hz);

/// Mean power over samples whose magnitude exceeds 1% of the peak.
double active_power(std::span<const double> x);

/// White Gaussian noise at the requested SNR relative to active_power(x).
/// An empty or infinite SNR returns the input unchanged.
std::vector<double> add_awgn(std::span<const double> x, std::optional<double> snr_db, std::uint64_t seed);

/// Adds `interferer` (zero-padded or truncated to |x|) scaled to the requested
/// SIR, both powers taken over their active windows.
std::vector<double> add_interference(std::span<const double> x, std::span<const double> interferer,
                                     std::optional<double> sir_db);

/// out[k] = sum_n r[k + n] t[n] / sum_n t[n]^2, so k is the template onset.
/// One-bit mode replaces both inputs by their signs first.
std::vector<double> matched_filter(std::span<const double> received, std::span<const double> templ,
                                   bool one_bit = false);

struct CompressedEnvelope {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  std::optional<std::size_t> fixed_length;
};

inline constexpr double kDefaultEnvelopeCutoffHz = 5000.0;

/// Rectified correlation smoothed by a forward-backward Butterworth low-pass.
CompressedEnvelope envelope(std::span<const double> correlation, double sample_rate_hz,
                            double cutoff_hz = kDefaultEnvelopeCutoffHz);

/// Anti-aliased decimation to exactly `target_length` samples; output sample
/// i sits at input position i * N / target_length.
CompressedEnvelope fixed_size_downsample(const CompressedEnvelope& env, std::size_t target_length);

/// Scales to unit peak; all-zero input is returned unchanged.
std::vector<double> normalize_peak(std::span<const double> x);

struct NoisePlan {
  std::optional<double> snr_db;
  std::optional<double> sir_db;
  std::vector<double> interferer;
  int monte_carlo_runs = 1;
  std::uint64_t seed = 0;
};

void validate(const NoisePlan& plan);

struct PostprocessOptions {
  double sample_rate_hz = 250000.0;
  double envelope_cutoff_hz = kDefaultEnvelopeCutoffHz;
  std::size_t fixed_length = 0;  // 0 keeps the full-rate envelope only
  bool one_bit = false;
  bool agc = false;
};

struct ProcessedSignal {
  CompressedEnvelope envelope;
  std::optional<CompressedEnvelope> features;
};

/// interference -> noise -> optional AGC -> matched filter -> envelope ->
/// optional fixed-size features.
ProcessedSignal postprocess(std::span<const double> received, std::span<const double> templ,
                            std::optional<double> snr_db, std::optional<double> sir_db,
                            std::span<const double> interferer, std::uint64_t noise_seed,
                            const PostprocessOptions& opts);

/// Noise stream for one (snr index, run, signal index) triple of a sweep.
std::uint64_t sweep_seed(std::uint64_t seed, std::size_t snr_index, std::size_t run, std::size_t signal_index);

struct SweepResult {
  double snr_db = 0.0;
  std::size_t run = 0;
  std::vector<ProcessedSignal> signals;
};

/// Re-processes the same clean signals for every (snr, run) pair.
std::vector<SweepResult> monte_carlo_noise_sweep(std::span<const std::vector<double>> clean,
                                                 std::span<const double> templ, std::span<const double> snr_db,
                                                 std::size_t runs, std::uint64_t seed,
                                                 const PostprocessOptions& opts);

}  // namespace acousim
