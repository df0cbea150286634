#include "acousim/signal.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace acousim;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> tone(double f, double fs, std::size_t n, double amp = 1.0, double phase = 0.3) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

// Amplitude of the component at f by projection on sin and cos over
// [start, start + n), n spanning whole cycles.
double tone_amplitude(std::span<const double> x, double f, double fs, std::size_t start, std::size_t n) {
  double s = 0;
  double c = 0;
  for (std::size_t i = start; i < start + n; ++i) {
    const double ph = 2 * kPi * f * static_cast<double>(i) / fs;
    s += x[i] * std::sin(ph);
    c += x[i] * std::cos(ph);
  }
  return 2 * std::hypot(s, c) / static_cast<double>(n);
}

double mean_square(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

std::size_t argmax(std::span<const double> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

std::vector<double> delayed(std::span<const double> s, std::size_t delay, std::size_t total) {
  std::vector<double> x(total, 0.0);
  std::copy(s.begin(), s.end(), x.begin() + static_cast<long>(delay));
  return x;
}

}  // namespace

TEST_CASE("chirp") {
  const ChirpSpec spec{45000, 25000, 0.03, 1.0};
  const auto s = generate_chirp(spec, 250000);
  CHECK(s.size() == 7500);
  CHECK(s[0] == 0.0);
  for (std::size_t i = 0; i < s.size(); i += 97) {
    const double t = static_cast<double>(i) / 250000;
    CHECK(s[i] == doctest::Approx(std::sin(2 * kPi * (45000 * t - 20000 * t * t / (2 * 0.03)))).scale(1.0).epsilon(1e-9));
  }
  // Zero-crossing count over 2 ms centered at T/2.
  int crossings = 0;
  for (std::size_t i = 3750 - 250; i < 3750 + 250; ++i) crossings += (s[i] < 0) != (s[i + 1] < 0);
  CHECK(crossings / (2 * 0.002) == doctest::Approx(35000).epsilon(0.02));

  CHECK_ERROR_CODE(generate_chirp(spec, 90000), ErrorCode::AliasedChirp);
  CHECK_ERROR_CODE(generate_chirp(spec, 80000), ErrorCode::AliasedChirp);
}

TEST_CASE("resample") {
  const auto x = tone(10000, 250000, 20000);
  const auto same = resample(x, 250000, 250000);
  REQUIRE(same.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(same[i] - x[i]) <= 1e-9);

  const auto down = resample(x, 250000, 125000);
  CHECK(down.size() == 10000);
  CHECK(tone_amplitude(down, 10000, 125000, 2500, 5000) == doctest::Approx(1.0).epsilon(0.01));

  const auto alias = resample(tone(60000, 250000, 20000), 250000, 100000);
  CHECK(std::sqrt(2 * mean_square(std::span(alias).subspan(1000, 6000))) <= 1e-3);

  const auto back = resample(resample(x, 250000, 100000), 100000, 250000);
  REQUIRE(back.size() == x.size());
  CHECK(tone_amplitude(back, 10000, 250000, 5000, 10000) == doctest::Approx(1.0).epsilon(0.02));

  for (double f : {1000.0, 20000.0, 40000.0, 45000.0}) {
    const auto y = resample(tone(f, 250000, 40000), 250000, 100000);
    const double db = 20 * std::log10(tone_amplitude(y, f, 100000, 2000, 12000));
    CHECK(std::abs(db) <= 0.1);
  }
}

TEST_CASE("white noise at a requested SNR") {
  const double amp = 0.7;
  const auto x = tone(12345.6, 250000, 1000000, amp);
  CHECK(add_awgn(x, std::nullopt, 1) == x);
  CHECK(add_awgn(x, INFINITY, 1) == x);

  for (double snr : {0.0, 10.0, 30.0}) {
    const auto y = add_awgn(x, snr, 42);
    const double noise = mean_square(difference(y, x));
    const double measured = 10 * std::log10(amp * amp / 2 / noise);
    CHECK(std::abs(measured - snr) <= 0.2);
    if (snr == 0.0) CHECK(noise == doctest::Approx(amp * amp / 2).epsilon(0.02));
  }
  CHECK(add_awgn(x, 10.0, 7) == add_awgn(x, 10.0, 7));
  CHECK(add_awgn(x, 10.0, 7) != add_awgn(x, 10.0, 8));
  CHECK_ERROR_CODE(add_awgn(std::vector<double>(100, 0.0), 10.0, 1), ErrorCode::ZeroPowerSignal);
}

TEST_CASE("interference at a requested SIR") {
  const auto x = tone(12345.6, 250000, 100000, 0.5);
  const auto interferer = tone(3210.9, 250000, 100000, 2.0, 1.1);
  CHECK(add_interference(x, interferer, std::nullopt) == x);
  CHECK(add_interference(x, interferer, INFINITY) == x);

  const auto y = add_interference(x, interferer, 0.0);
  CHECK(mean_square(difference(y, x)) == doctest::Approx(mean_square(x)).epsilon(0.02));

  const auto twice = add_interference(x, x, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(twice[i] == doctest::Approx(2 * x[i]).scale(1.0).epsilon(1e-12));

  CHECK_ERROR_CODE(add_interference(x, std::vector<double>(10, 0.0), 0.0), ErrorCode::ZeroPowerInterferer);
}

TEST_CASE("matched filter") {
  const auto templ = generate_chirp({45000, 25000, 0.003, 1.0}, 250000);
  const auto rx = delayed(templ, 500, 3000);
  CHECK(argmax(matched_filter(rx, templ)) == 500);

  const auto zero = matched_filter(std::vector<double>(3000, 0.0), templ);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));

  CHECK_ERROR_CODE(matched_filter(rx, std::vector<double>{}), ErrorCode::EmptyTemplate);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> r(1000);
  std::vector<double> t(137);
  for (double& v : r) v = g(rng);
  for (double& v : t) v = g(rng);
  const auto fast = matched_filter(r, t);
  double tt = 0;
  for (double v : t) tt += v * v;
  double scale = 0;
  std::vector<double> brute(fast.size());
  for (std::size_t k = 0; k < fast.size(); ++k) {
    double acc = 0;
    for (std::size_t n = 0; n < t.size() && k + n < r.size(); ++n) acc += r[k + n] * t[n];
    brute[k] = acc / tt;
    scale = std::max(scale, std::abs(brute[k]));
  }
  for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::abs(fast[k] - brute[k]) <= 1e-6 * scale);
}

TEST_CASE("matched filter picks the delay at 30 dB") {
  const auto templ = generate_chirp({45000, 25000, 0.03, 1.0}, 250000);
  const auto rx = delayed(templ, 500, 10000);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto k = argmax(matched_filter(add_awgn(rx, 30.0, seed), templ));
    hits += k >= 499 && k <= 501;
  }
  CHECK(hits >= 99);
}

TEST_CASE("envelope") {
  const double fs = 250000;
  std::vector<double> peak(4000, 0.0);
  for (std::size_t i = 0; i < peak.size(); ++i) {
    const double t = (static_cast<double>(i) - 1700.0) / fs;
    peak[i] = std::cos(2 * kPi * 35000 * t) * std::exp(-t * t / (2 * 2e-5 * 2e-5));
  }
  const auto env = envelope(peak, fs);
  const auto k = static_cast<long>(argmax(env.samples));
  CHECK(std::abs(k - 1700) <= 1);
  CHECK(std::all_of(env.samples.begin(), env.samples.end(), [](double v) { return v >= 0.0; }));

  const auto z = envelope(std::vector<double>(1000, 0.0), fs);
  CHECK(std::all_of(z.samples.begin(), z.samples.end(), [](double v) { return v == 0.0; }));

  const auto templ = generate_chirp({45000, 25000, 0.03, 1.0}, fs);
  for (std::size_t delay : {123u, 2500u, 9000u}) {
    const auto e = envelope(matched_filter(delayed(templ, delay, 25000), templ), fs);
    CHECK(std::abs(static_cast<long>(argmax(e.samples)) - static_cast<long>(delay)) <= 1);
  }
}

TEST_CASE("fixed-size downsample") {
  CompressedEnvelope env{std::vector<double>(10000, 0.0), 250000, std::nullopt};
  env.samples[5000] = 1.0;
  const auto d = fixed_size_downsample(env, 1000);
  CHECK(d.samples.size() == 1000);
  CHECK(d.fixed_length == 1000u);
  CHECK(std::abs(static_cast<long>(argmax(d.samples)) - 500) <= 1);

  const auto same = fixed_size_downsample(env, 10000);
  CHECK(same.samples == env.samples);
  CHECK_ERROR_CODE(fixed_size_downsample(env, 20000), ErrorCode::UpsamplingRequested);
}

TEST_CASE("noise sweep") {
  const double fs = 250000;
  const auto templ = generate_chirp({45000, 25000, 0.0004, 1.0}, fs);
  const std::vector<std::vector<double>> clean{delayed(templ, 700, 3000), delayed(templ, 1500, 3000)};
  const PostprocessOptions opts;

  const std::vector<double> one{20.0};
  const auto sweep = monte_carlo_noise_sweep(clean, templ, one, 1, 99, opts);
  REQUIRE(sweep.size() == 1);
  for (std::size_t k = 0; k < clean.size(); ++k) {
    const auto direct = envelope(matched_filter(add_awgn(clean[k], 20.0, sweep_seed(99, 0, 0, k)), templ), fs);
    CHECK(sweep[0].signals[k].envelope.samples == direct.samples);
  }

  const std::vector<double> snrs{0.0, 10.0, 20.0, 30.0};
  const auto a = monte_carlo_noise_sweep(clean, templ, snrs, 3, 4, opts);
  const auto b = monte_carlo_noise_sweep(clean, templ, snrs, 3, 4, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < clean.size(); ++k) CHECK(a[i].signals[k].envelope.samples == b[i].signals[k].envelope.samples);

  // Ranging error variance shrinks as the SNR grows.
  const std::size_t runs = 300;
  const auto big = monte_carlo_noise_sweep(std::span(clean).first(1), templ, snrs, runs, 11, opts);
  std::vector<double> var(snrs.size(), 0.0);
  for (const SweepResult& r : big) {
    const std::size_t s = static_cast<std::size_t>(std::find(snrs.begin(), snrs.end(), r.snr_db) - snrs.begin());
    const double e = static_cast<double>(argmax(r.signals[0].envelope.samples)) - 700.0;
    var[s] += e * e / static_cast<double>(runs);
  }
  for (std::size_t s = 1; s < var.size(); ++s) CHECK(var[s] <= var[s - 1]);
  CHECK(var[0] > var.back());
}
