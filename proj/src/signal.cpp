#include "acousim/signal.hpp"

#include "acousim/dsp.hpp"
#include "acousim/error.hpp"
#include "acousim/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace acousim {

void validate(const ChirpSpec& spec) {
  require(spec.f_start_hz > 0.0 && spec.f_end_hz > 0.0, "chirp frequencies must be positive");
  require(spec.duration_s > 0.0, "chirp duration must be positive");
  require(std::isfinite(spec.amplitude), "chirp amplitude must be finite");
}

std::vector<double> generate_chirp(const ChirpSpec& spec, double sample_rate_hz) {
  validate(spec);
  require(sample_rate_hz > 0.0, "sample rate must be positive");
  if (std::max(spec.f_start_hz, spec.f_end_hz) >= 0.5 * sample_rate_hz) {
    fail(ErrorCode::AliasedChirp, "chirp reaches or exceeds Nyquist");
  }
  const auto n = static_cast<std::size_t>(std::ceil(spec.duration_s * sample_rate_hz - 1e-9));
  const double sweep = (spec.f_end_hz - spec.f_start_hz) / (2.0 * spec.duration_s);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    s[i] = spec.amplitude * std::sin(2.0 * std::numbers::pi * (spec.f_start_hz * t + sweep * t * t));
  }
  return s;
}

namespace {

long long integer_rate(double r) {
  const long long v = std::llround(r);
  require(v > 0 && std::abs(r - static_cast<double>(v)) < 1e-6, "sample rates must be positive integers in Hz");
  return v;
}

std::vector<double> kaiser_lowpass(long long up, double cutoff_hz, double transition_hz, double rate_hz) {
  constexpr double kAttenuationDb = 80.0;
  const double beta = 0.1102 * (kAttenuationDb - 8.7);
  const double width = 2.0 * std::numbers::pi * transition_hz / rate_hz;
  auto taps = static_cast<std::size_t>(std::ceil((kAttenuationDb - 8.0) / (2.285 * width))) + 1;
  if (taps % 2 == 0) ++taps;
  const double mid = 0.5 * static_cast<double>(taps - 1);
  const double fc = cutoff_hz / rate_hz;  // cycles per sample
  const double norm = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const double x = static_cast<double>(n) - mid;
    const double sinc = x == 0.0 ? 1.0 : std::sin(2.0 * std::numbers::pi * fc * x) / (std::numbers::pi * x * 2.0 * fc);
    const double r = mid > 0.0 ? x / mid : 0.0;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    h[n] = static_cast<double>(up) * 2.0 * fc * sinc * w;
  }
  return h;
}

}  // namespace

std::vector<double> resample(std::span<const double> x, double from_rate_hz, double to_rate_hz) {
  const long long from = integer_rate(from_rate_hz);
  const long long to = integer_rate(to_rate_hz);
  if (from == to) return {x.begin(), x.end()};
  const long long g = std::gcd(from, to);
  const long long up = to / g;
  const long long down = from / g;
  const double low = static_cast<double>(std::min(from, to));
  const double rate = static_cast<double>(from * up);
  const std::vector<double> h = kaiser_lowpass(up, 0.475 * low, 0.05 * low, rate);
  const auto taps = static_cast<long long>(h.size());
  const long long delay = (taps - 1) / 2;

  const auto n_in = static_cast<long long>(x.size());
  const long long n_out = (n_in * up + down - 1) / down;
  std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);
  for (long long m = 0; m < n_out; ++m) {
    const long long pos = m * down + delay;  // index into the upsampled stream
    long long i_hi = pos / up;
    long long i_lo = pos - (taps - 1);
    i_lo = i_lo <= 0 ? 0 : (i_lo + up - 1) / up;
    i_hi = std::min(i_hi, n_in - 1);
    double acc = 0.0;
    for (long long i = i_lo; i <= i_hi; ++i) acc += h[static_cast<std::size_t>(pos - i * up)] * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(m)] = acc;
  }
  return y;
}

double active_power(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const double threshold = 0.01 * peak;
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : x) {
    if (std::abs(v) > threshold) {
      sum += v * v;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::vector<double> add_awgn(std::span<const double> x, std::optional<double> snr_db, std::uint64_t seed) {
  std::vector<double> y(x.begin(), x.end());
  if (!snr_db || std::isinf(*snr_db)) return y;
  const double power = active_power(x);
  if (power <= 0.0) fail(ErrorCode::ZeroPowerSignal, "cannot calibrate noise against a silent signal");
  const double sigma = std::sqrt(power / std::pow(10.0, *snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double& v : y) v += gauss(rng);
  return y;
}

std::vector<double> add_interference(std::span<const double> x, std::span<const double> interferer,
                                     std::optional<double> sir_db) {
  std::vector<double> y(x.begin(), x.end());
  if (!sir_db || std::isinf(*sir_db)) return y;
  std::vector<double> padded(x.size(), 0.0);
  std::copy_n(interferer.begin(), std::min(interferer.size(), x.size()), padded.begin());
  const double pi = active_power(padded);
  if (pi <= 0.0) fail(ErrorCode::ZeroPowerInterferer, "interferer has no power within the signal span");
  const double ps = active_power(x);
  if (ps <= 0.0) fail(ErrorCode::ZeroPowerSignal, "cannot calibrate interference against a silent signal");
  const double gain = std::sqrt(ps / std::pow(10.0, *sir_db / 10.0) / pi);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += gain * padded[i];
  return y;
}

namespace {

std::vector<double> sign_of(std::span<const double> x) {
  std::vector<double> s(x.size());
  std::transform(x.begin(), x.end(), s.begin(), [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  return s;
}

}  // namespace

std::vector<double> matched_filter(std::span<const double> received, std::span<const double> templ, bool one_bit) {
  if (templ.empty()) fail(ErrorCode::EmptyTemplate, "matched filter template is empty");
  require(templ.size() <= received.size(), "template longer than the received signal");
  std::vector<double> r;
  std::vector<double> t;
  if (one_bit) {
    r = sign_of(received);
    t = sign_of(templ);
  } else {
    r.assign(received.begin(), received.end());
    t.assign(templ.begin(), templ.end());
  }
  const double e = dsp::energy(t);
  if (e <= 0.0) fail(ErrorCode::EmptyTemplate, "matched filter template has zero energy");
  std::vector<double> out = dsp::correlate(r, t);
  for (double& v : out) v /= e;
  return out;
}

CompressedEnvelope envelope(std::span<const double> correlation, double sample_rate_hz, double cutoff_hz) {
  std::vector<double> mag(correlation.size());
  std::transform(correlation.begin(), correlation.end(), mag.begin(), [](double v) { return std::abs(v); });
  CompressedEnvelope env;
  env.sample_rate_hz = sample_rate_hz;
  env.samples = dsp::zero_phase_lowpass(mag, cutoff_hz, sample_rate_hz);
  for (double& v : env.samples) v = std::max(0.0, v);
  return env;
}

CompressedEnvelope fixed_size_downsample(const CompressedEnvelope& env, std::size_t target_length) {
  require(target_length >= 2, "fixed length must be at least 2");
  const std::size_t n = env.samples.size();
  if (target_length > n) fail(ErrorCode::UpsamplingRequested, "fixed length exceeds the envelope length");
  CompressedEnvelope out;
  out.fixed_length = target_length;
  out.sample_rate_hz = env.sample_rate_hz * static_cast<double>(target_length) / static_cast<double>(n);
  if (target_length == n) {
    out.samples = env.samples;
    return out;
  }
  const double ratio = static_cast<double>(n) / static_cast<double>(target_length);
  const double half = std::ceil(4.0 * ratio);
  out.samples.resize(target_length);
  for (std::size_t i = 0; i < target_length; ++i) {
    const double p = static_cast<double>(i) * ratio;
    const auto lo = static_cast<long long>(std::max(0.0, std::ceil(p - half)));
    const auto hi = static_cast<long long>(std::min(static_cast<double>(n - 1), std::floor(p + half)));
    double acc = 0.0;
    double wsum = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      const double x = static_cast<double>(k) - p;
      const double u = x / ratio;
      const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      const double w = sinc * 0.5 * (1.0 + std::cos(std::numbers::pi * x / (half + 1.0)));
      acc += w * env.samples[static_cast<std::size_t>(k)];
      wsum += w;
    }
    out.samples[i] = wsum != 0.0 ? std::max(0.0, acc / wsum) : 0.0;
  }
  return out;
}

std::vector<double> normalize_peak(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  std::vector<double> y(x.begin(), x.end());
  if (peak > 0.0) {
    for (double& v : y) v /= peak;
  }
  return y;
}

void validate(const NoisePlan& plan) {
  require(plan.monte_carlo_runs >= 1, "monte_carlo_runs must be at least 1");
  if (plan.sir_db && !std::isinf(*plan.sir_db)) require(!plan.interferer.empty(), "sir_db requires an interferer");
}

ProcessedSignal postprocess(std::span<const double> received, std::span<const double> templ,
                            std::optional<double> snr_db, std::optional<double> sir_db,
                            std::span<const double> interferer, std::uint64_t noise_seed,
                            const PostprocessOptions& opts) {
  std::vector<double> x = add_interference(received, interferer, sir_db);
  x = add_awgn(x, snr_db, noise_seed);
  if (opts.agc) x = normalize_peak(x);
  const std::vector<double> corr = matched_filter(x, templ, opts.one_bit);
  ProcessedSignal out;
  out.envelope = envelope(corr, opts.sample_rate_hz, opts.envelope_cutoff_hz);
  if (opts.fixed_length > 0) out.features = fixed_size_downsample(out.envelope, opts.fixed_length);
  return out;
}

std::uint64_t sweep_seed(std::uint64_t seed, std::size_t snr_index, std::size_t run, std::size_t signal_index) {
  return derive_seed(seed, {snr_index, run, signal_index});
}

std::vector<SweepResult> monte_carlo_noise_sweep(std::span<const std::vector<double>> clean,
                                                 std::span<const double> templ, std::span<const double> snr_db,
                                                 std::size_t runs, std::uint64_t seed,
                                                 const PostprocessOptions& opts) {
  require(runs >= 1, "runs must be at least 1");
  std::vector<SweepResult> out;
  for (std::size_t s = 0; s < snr_db.size(); ++s) {
    for (std::size_t r = 0; r < runs; ++r) {
      SweepResult res;
      res.snr_db = snr_db[s];
      res.run = r;
      for (std::size_t k = 0; k < clean.size(); ++k) {
        res.signals.push_back(postprocess(clean[k], templ, snr_db[s], std::nullopt, {}, sweep_seed(seed, s, r, k), opts));
      }
      out.push_back(std::move(res));
    }
  }
  return out;
}

}  // namespace acousim
