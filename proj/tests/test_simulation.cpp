#include "acousim/image_source.hpp"
#include "acousim/positioning.hpp"
#include "acousim/signal.hpp"
#include "acousim/simulation.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace acousim;

namespace {

Room box(double x, double y, double z, std::vector<Material> materials, bool air = true) {
  RoomSpec s;
  s.floor_vertices = {{0, 0}, {x, 0}, {x, y}, {0, y}};
  s.height = z;
  s.materials = std::move(materials);
  s.environment.air_absorption = air;
  return validate_room(s);
}

Room l_room(std::vector<Material> materials) {
  RoomSpec s;
  s.floor_vertices = {{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}};
  s.height = 2.5;
  s.materials = std::move(materials);
  return validate_room(s);
}

Speaker omni_speaker(Vec3 p) { return {"s", p, {}}; }
Microphone mic_at(Vec3 p, double fs = 250000) { return {"m", p, {}, fs}; }

double energy(std::span<const double> x) {
  double e = 0;
  for (double v : x) e += v * v;
  return e;
}

std::size_t argmax(std::span<const double> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

}  // namespace

TEST_CASE("fully absorbing walls leave only the direct bin") {
  const Room r = box(5, 4, 3, {Material::flat("open", 1.0)});
  const Vec3 src(1.0, 1.0, 1.5);
  const Microphone m = mic_at({3.5, 2.5, 1.2});
  const std::vector<double> bands{1000.0, 8000.0};
  RayTracingOptions opts;
  opts.n_rays = 20000;
  opts.seed = 3;
  const double fs = 48000;
  const auto h = trace_rays(r, omni_speaker(src), std::span(&m, 1), opts, fs, bands);
  const double c = speed_of_sound(20.0);
  const auto direct = static_cast<std::size_t>(std::floor((m.position - src).norm() / c * fs + 0.5));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    CHECK(h[0].energy[b][direct] > 0);
    for (std::size_t i = 0; i < h[0].bins(); ++i) {
      if (i != direct) CHECK(h[0].energy[b][i] == 0.0);
    }
  }
}

TEST_CASE("ray tracing is deterministic per seed") {
  const Room r = box(5, 4, 3, {Material::flat("m", 0.3)});
  const Microphone m = mic_at({3.5, 2.5, 1.2});
  const std::vector<double> bands{1000.0};
  RayTracingOptions opts;
  opts.n_rays = 2000;
  opts.seed = 9;
  const auto a = trace_rays(r, omni_speaker({1, 1, 1.5}), std::span(&m, 1), opts, 48000, bands);
  const auto b = trace_rays(r, omni_speaker({1, 1, 1.5}), std::span(&m, 1), opts, 48000, bands);
  CHECK(a[0].energy == b[0].energy);
  opts.seed = 10;
  const auto c = trace_rays(r, omni_speaker({1, 1, 1.5}), std::span(&m, 1), opts, 48000, bands);
  CHECK(a[0].energy != c[0].energy);
}

TEST_CASE("ray-traced energy agrees with the image-source energy sum") {
  const Room r = box(1, 1, 1, {Material::flat("m", 0.9)}, false);
  const Vec3 src(0.3, 0.35, 0.4);
  const Microphone m = mic_at({0.7, 0.6, 0.55});
  const std::vector<double> bands{1000.0};
  RayTracingOptions opts;
  opts.n_rays = 100000;
  opts.mic_radius = 0.15;
  opts.seed = 21;
  const auto h = trace_rays(r, omni_speaker(src), std::span(&m, 1), opts, 48000, bands);

  double ism = 0;
  for_each_shoebox_image(r, src, 10, bands, [&](const ShoeboxImage& im) {
    const double d = (im.position - m.position).norm();
    ism += im.band_gain[0] * im.band_gain[0] / (16 * std::numbers::pi * std::numbers::pi * d * d);
  });
  CHECK(std::abs(h[0].total(0) - ism) <= 0.1 * ism);
}

TEST_CASE("single direct path lands on its integer delay") {
  const Room r = box(10, 10, 5, {Material::flat("open", 1.0)}, false);
  const double fs = 250000;
  const double c = speed_of_sound(20.0);
  const std::size_t n0 = 2000;
  const double d = static_cast<double>(n0) * c / fs;
  const Vec3 src(2, 5, 2.5);
  const Microphone m = mic_at(src + Vec3(d, 0, 0));
  SimulationOptions opts;
  opts.max_order = 3;
  opts.rir_duration_s = 0.02;
  const auto rir = simulate_rirs(r, omni_speaker(src), std::span(&m, 1), opts);
  const auto& h = rir[0].samples;
  CHECK(argmax(h) == n0);
  CHECK(h[n0] == doctest::Approx(1.0 / (4 * std::numbers::pi * d)).epsilon(1e-3));
  for (double v : h) CHECK(std::isfinite(v));
}

TEST_CASE("one reflecting wall: peak ratio follows spreading and reflection loss") {
  const double fs = 250000;
  const double c = speed_of_sound(20.0);
  const double u = c / fs;
  const double alpha = 0.3;
  // Surfaces: wall y=0 first, then x=4, y=4, x=0, floor, ceiling.
  std::vector<Material> mats(6, Material::flat("open", 1.0));
  mats[0] = Material::flat("panel", alpha);
  const Room r = box(4, 4, 3, mats, false);
  const Vec3 src(2, 300 * u, 1.5);
  const Microphone m = mic_at({2, 1100 * u, 1.5});
  SimulationOptions opts;
  opts.max_order = 2;
  opts.rir_duration_s = 0.01;
  const auto h = simulate_rirs(r, omni_speaker(src), std::span(&m, 1), opts)[0].samples;
  const double d1 = 800 * u;
  const double d2 = 1400 * u;
  const double expected = (d1 / d2) * std::sqrt(1 - alpha);
  CHECK(h[1400] / h[800] == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("hypercardioid aimed at the mic matches omni on the direct path") {
  const Room r = box(6, 5, 3, {Material::flat("open", 1.0)});
  const Vec3 src(1, 1, 1);
  const Microphone m = mic_at({4, 3.5, 2});
  SimulationOptions opts;
  opts.max_order = 1;
  opts.rir_duration_s = 0.03;
  Speaker aimed = omni_speaker(src);
  aimed.directivity = {0.25, (m.position - src).normalized()};
  const auto a = simulate_rirs(r, omni_speaker(src), std::span(&m, 1), opts)[0].samples;
  const auto b = simulate_rirs(r, aimed, std::span(&m, 1), opts)[0].samples;
  REQUIRE(a.size() == b.size());
  const std::size_t k = argmax(a);
  CHECK(argmax(b) == k);
  CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
}

TEST_CASE("unit impulse returns the resampled RIR") {
  const Room r = box(5, 4, 3, {Material::flat("m", 0.4)});
  const std::vector<Speaker> spk{omni_speaker({1.2, 1.1, 1.3})};
  SimulationOptions opts;
  opts.max_order = 4;
  opts.rir_duration_s = 0.03;
  opts.capture_duration_s = 0.04;
  const std::vector<double> impulse{1.0};
  const std::size_t capture = 10000;

  const std::vector<Microphone> full{mic_at({3.9, 2.7, 1.6})};
  const auto ch = simulate_room(r, spk, full, impulse, opts);
  REQUIRE(ch.size() == 1);
  std::vector<double> padded = ch[0].rir.samples;
  padded.resize(capture, 0.0);
  REQUIRE(ch[0].received.size() == capture);
  for (std::size_t i = 0; i < capture; ++i) CHECK(ch[0].received[i] == doctest::Approx(padded[i]).epsilon(1e-9).scale(1e-9));

  const std::vector<Microphone> half{mic_at({3.9, 2.7, 1.6}, 125000)};
  const auto ch2 = simulate_room(r, spk, half, impulse, opts);
  const auto expected = resample(padded, 250000, 125000);
  REQUIRE(ch2[0].received.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(ch2[0].received[i] == doctest::Approx(expected[i]).epsilon(1e-9).scale(1e-9));
}

TEST_CASE("free-field chirp gives the geometric time of flight") {
  const Room r = box(10, 10, 5, {Material::flat("open", 1.0)});
  const Vec3 src(2, 5, 2.5);
  const std::vector<Speaker> spk{omni_speaker(src)};
  const std::vector<Microphone> mics{mic_at(src + Vec3(3.0, 0, 0))};
  const ChirpSpec chirp;
  const auto templ = generate_chirp(chirp, 250000);
  SimulationOptions opts;
  opts.max_order = 1;
  const auto ch = simulate_room(r, spk, mics, templ, opts);
  const auto env = envelope(matched_filter(ch[0].received, templ), 250000);
  const TofEstimate tof = estimate_tof(env);
  const double c = speed_of_sound(20.0);
  CHECK(std::abs(tof.tof_s - 3.0 / c) * 250000 <= 2.0);
}

TEST_CASE("symmetric microphones receive identical signals") {
  const Room r = box(5, 4, 3, {Material::flat("m", 0.35)});
  const std::vector<Speaker> spk{omni_speaker({2.5, 1.0, 1.5})};
  const std::vector<Microphone> mics{mic_at({1.5, 3.0, 1.2}), mic_at({3.5, 3.0, 1.2})};
  const auto templ = generate_chirp(ChirpSpec{}, 250000);
  SimulationOptions opts;
  opts.max_order = 5;
  opts.capture_duration_s = 0.05;
  opts.rir_duration_s = 0.05;
  const auto ch = simulate_room(r, spk, mics, templ, opts);
  REQUIRE(ch[0].received.size() == ch[1].received.size());
  for (std::size_t i = 0; i < ch[0].received.size(); ++i) CHECK(std::abs(ch[0].received[i] - ch[1].received[i]) <= 1e-9);
}

TEST_CASE("RIR energy falls as absorption rises") {
  const Vec3 src(1.3, 1.1, 1.2);
  const Microphone m = mic_at({3.7, 2.9, 1.8});
  SimulationOptions opts;
  opts.max_order = 6;
  opts.rir_duration_s = 0.05;
  double prev = INFINITY;
  for (double a : {0.05, 0.2, 0.4, 0.7, 0.95}) {
    const auto h = simulate_rirs(box(5, 4, 3, {Material::flat("m", a)}), omni_speaker(src), std::span(&m, 1), opts);
    for (double v : h[0].samples) REQUIRE(std::isfinite(v));
    const double e = energy(h[0].samples);
    CHECK(e < prev);
    prev = e;
  }
  // Raising one surface alone also lowers the energy.
  std::vector<Material> mats(6, Material::flat("m", 0.2));
  const double base = energy(simulate_rirs(box(5, 4, 3, mats), omni_speaker(src), std::span(&m, 1), opts)[0].samples);
  mats[4] = Material::flat("carpet", 0.6);
  const double damped = energy(simulate_rirs(box(5, 4, 3, mats), omni_speaker(src), std::span(&m, 1), opts)[0].samples);
  CHECK(damped < base);
}

TEST_CASE("hybrid mode is deterministic per seed") {
  const Room r = box(5, 4, 3, {Material::flat("m", 0.3)});
  const Microphone m = mic_at({3.7, 2.9, 1.8}, 48000);
  SimulationOptions opts;
  opts.mode = SimulationMode::hybrid;
  opts.sim_rate_hz = 48000;
  opts.rir_duration_s = 0.2;
  opts.rays = 3000;
  opts.seed = 5;
  const auto a = simulate_rirs(r, omni_speaker({1.3, 1.1, 1.2}), std::span(&m, 1), opts)[0].samples;
  const auto b = simulate_rirs(r, omni_speaker({1.3, 1.1, 1.2}), std::span(&m, 1), opts)[0].samples;
  CHECK(a == b);
  opts.seed = 6;
  const auto c = simulate_rirs(r, omni_speaker({1.3, 1.1, 1.2}), std::span(&m, 1), opts)[0].samples;
  CHECK(a != c);
  // Late tail is present beyond the deterministic early part.
  double late = 0;
  for (std::size_t i = 48000 / 20; i < a.size(); ++i) late += a[i] * a[i];
  CHECK(late > 0);
}

TEST_CASE("unsupported combinations are rejected") {
  std::vector<Material> mixed(8, Material::flat("m", 0.3));
  mixed[2] = Material::flat("glass", 0.05);
  const Microphone m = mic_at({1, 1, 1.2});
  SimulationOptions opts;
  opts.max_order = 1;
  opts.rir_duration_s = 0.02;
  CHECK_ERROR_CODE(simulate_rirs(l_room(mixed), omni_speaker({3, 1, 1}), std::span(&m, 1), opts),
                   ErrorCode::MixedMaterialsUnsupported);
  opts.allow_mixed_materials = true;
  CHECK_NOTHROW(simulate_rirs(l_room(mixed), omni_speaker({3, 1, 1}), std::span(&m, 1), opts));

  Speaker directional = omni_speaker({3, 1, 1});
  directional.directivity = {0.25, Vec3::UnitX()};
  opts.allow_mixed_materials = false;
  CHECK_ERROR_CODE(simulate_rirs(l_room({Material::flat("m", 0.3)}), directional, std::span(&m, 1), opts),
                   ErrorCode::DirectionalTransducerUnsupported);

  std::vector<Material> six(6, Material::flat("m", 0.3));
  six[0] = Material::flat("glass", 0.05);
  opts.mode = SimulationMode::hybrid;
  CHECK_ERROR_CODE(simulate_rirs(box(5, 4, 3, six), omni_speaker({3, 1, 1}), std::span(&m, 1), opts),
                   ErrorCode::MixedMaterialsUnsupported);
}
