// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include "acousim/cache.hpp"
#include "acousim/config.hpp"
#include "acousim/evaluation.hpp"
#include "acousim/image_source.hpp"
#include "acousim/io.hpp"
#include "acousim/pipeline.hpp"
#include "acousim/positioning.hpp"
#include "acousim/propagation.hpp"
#include "acousim/signal.hpp"
#include "acousim/simulation.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

using namespace acousim;
namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = ACOUSIM_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Room box(double x, double y, double z, std::vector<Material> materials, std::optional<double> rt60 = std::nullopt,
         Environment env = {}) {
  RoomSpec s;
  s.floor_vertices = {{0, 0}, {x, 0}, {x, y}, {0, y}};
  s.height = z;
  s.materials = std::move(materials);
  s.rt60_target = rt60;
  s.environment = env;
  return validate_room(s);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class ScratchDir {
 public:
  ScratchDir() : path_(fs::temp_directory_path() / ("acousim_acceptance_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::map<std::string, std::string> output_hashes(const fs::path& out, std::optional<Stage> only = std::nullopt) {
  std::map<std::string, std::string> h;
  for (Stage s : all_stages()) {
    if (only && s != *only) continue;
    const fs::path dir = out / to_string(s);
    if (!fs::exists(dir)) continue;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) h[fs::relative(e.path(), out).generic_string()] = sha256_file(e.path());
  }
  return h;
}

RunReport run_desk(const PipelineConfig& cfg, const fs::path& out, std::size_t workers) {
  RunOptions opts;
  opts.out_dir = out;
  opts.cache_dir = out / ".cache";
  opts.workers = workers;
  return run_pipeline(cfg, opts);
}

// 1. Free-field ranging at 3 m.
Outcome free_field_ranging() {
  const double fs_hz = 250000;
  const Room room = box(8, 6, 4, {Material::flat("anechoic", 1.0)});
  const Speaker spk{"S", {1.5, 3.0, 2.0}, {}};
  const Microphone mic{"M", {4.5, 3.0, 2.0}, {}, fs_hz};
  const auto templ = generate_chirp({45000, 25000, 0.03, 1.0}, fs_hz);
  SimulationOptions sim;
  sim.max_order = 2;
  sim.sim_rate_hz = fs_hz;
  sim.rir_duration_s = 0.05;
  sim.capture_duration_s = 0.05;
  const auto ch = simulate_room(room, std::span(&spk, 1), std::span(&mic, 1), templ, sim);
  const double c = speed_of_sound(room.environment().temperature_c);
  const double tol = 2 * c / fs_hz;
  PostprocessOptions pp;
  pp.sample_rate_hz = fs_hz;
  int hits = 0;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = postprocess(ch[0].received, templ, 30.0, std::nullopt, {}, seed, pp);
    const double err = std::abs(make_range("S", estimate_tof(p.envelope), c).range_m - 3.0);
    worst = std::max(worst, err);
    hits += err <= tol;
  }
  return {hits >= 95, fmt("%d/100 runs within %.2f mm (worst %.2f mm)", hits, tol * 1e3, worst * 1e3)};
}

// 2. Shoebox images against the lattice mirror map.
Outcome shoebox_images() {
  const Room room = box(5, 4, 3, {Material::flat("m", 0.3)});
  const Vec3 L(5, 4, 3);
  const Vec3 src(1.3, 1.1, 1.2);
  const std::vector<double> bands{1000.0};
  auto coord = [](int p, double len, double x) { return p % 2 == 0 ? p * len + x : (p + 1) * len - x; };
  double worst = 0;
  bool counts = true;
  std::size_t order2 = 0;
  for (int order = 0; order <= 3; ++order) {
    const auto images = enumerate_images_shoebox(room, src, order, bands);
    std::size_t expected = 0;
    for (int p = -order; p <= order; ++p)
      for (int q = -order; q <= order; ++q)
        for (int s = -order; s <= order; ++s) {
          if (std::abs(p) + std::abs(q) + std::abs(s) > order) continue;
          ++expected;
          const Vec3 x(coord(p, L.x(), src.x()), coord(q, L.y(), src.y()), coord(s, L.z(), src.z()));
          double nearest = INFINITY;
          for (const ImageSource& im : images) nearest = std::min(nearest, (im.position - x).norm());
          worst = std::max(worst, nearest);
        }
    counts = counts && images.size() == expected;
    if (order == 2) order2 = images.size();
  }
  return {worst < 1e-12 && counts && order2 == 25,
          fmt("max position error %.1e m, order-2 count %zu", worst, order2)};
}

// 3. Schroeder RT60 of rooms configured by inverse Sabine.
Outcome rt60_round_trip() {
  bool ok = true;
  std::string detail;
  for (double target : {0.3, 0.5, 1.0}) {
    Environment env;
    env.air_absorption = false;
    const Room room = box(5, 4, 3, {}, target, env);
    const auto sab = inverse_sabine(target, room);
    SimulationOptions sim;
    sim.max_order = sab.max_order;
    sim.sim_rate_hz = 250000;
    sim.rir_duration_s = target;
    sim.capture_duration_s = target;
    const Speaker spk{"S", {1.3, 1.1, 1.2}, {}};
    const Microphone mic{"M", {3.7, 2.9, 1.8}, {}, 250000};
    const auto rir = simulate_rirs(room, spk, std::span(&mic, 1), sim);
    const double measured = schroeder_rt60(rir[0].samples, rir[0].sample_rate_hz);
    const double rel = measured / target - 1;
    ok = ok && std::abs(rel) <= 0.2;
    detail += fmt("%sT=%.1f: %.3f s (%+.1f%%)", detail.empty() ? "" : ", ", target, measured, rel * 100);
  }
  return {ok, detail};
}

// 4. Multilateration against exact ranges and brute-force minimizers.
Outcome multilateration() {
  std::mt19937_64 rng(2024);
  double worst_exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_geometry(rng);
    const auto r = oracle::exact_ranges(g);
    for (Method m : all_methods()) worst_exact = std::max(worst_exact, (multilaterate(g.anchors, r, m).position - g.target).norm());
  }
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst_grid = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_geometry(rng);
    auto r = oracle::exact_ranges(g);
    for (double& v : r) v += noise(rng);
    for (Method m : all_methods()) {
      const bool squared = m == Method::bancroft || m == Method::beck || m == Method::cheung;
      const auto cost = [&](const Vec3& x) {
        return squared ? oracle::squared_range_cost(g.anchors, r, x) : oracle::range_cost(g.anchors, r, x);
      };
      const Vec3 est = multilaterate(g.anchors, r, m).position;
      worst_grid = std::max(worst_grid, (est - oracle::grid_minimizer(cost, g.target)).norm());
    }
  }
  return {worst_exact <= 1e-6 && worst_grid <= 0.002,
          fmt("exact ranges worst %.1e m, noisy vs grid minimizer worst %.2f mm", worst_exact, worst_grid * 1e3)};
}

// 5. Desk scenario through the full pipeline.
Outcome desk_scenario(const PipelineConfig& cfg, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  run_desk(cfg, out, 8);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const io::CsvTable tof = io::read_csv(out / "evaluation" / "tof_errors.csv");
  const std::size_t mic_col = tof.column("mic_id");
  const std::size_t run_col = tof.column("run");
  const std::size_t err_col = tof.column("error_samples");
  const std::size_t los_col = tof.column("los");
  std::size_t links = 0;
  std::size_t good = 0;
  std::map<std::string, bool> position_ok;
  for (const auto& row : tof.rows) {
    if (!row[mic_col].starts_with("test_") || row[los_col] != "true") continue;
    const bool ok = std::abs(std::stod(row[err_col])) <= 2.0;
    ++links;
    good += ok;
    auto [it, fresh] = position_ok.emplace(row[mic_col] + "/" + row[run_col], ok);
    if (!fresh) it->second = it->second && ok;
  }
  std::size_t good_pos = 0;
  for (const auto& [k, ok] : position_ok) good_pos += ok;
  const double link_share = links ? static_cast<double>(good) / static_cast<double>(links) : 0.0;

  bool cdfs_ok = true;
  std::size_t n_expected = std::min<std::size_t>(cfg.positions.max_test_points, 30);
  for (Method m : cfg.positioning.methods) {
    const io::CsvTable t = io::read_csv(out / "evaluation" / (std::string("cdf_") + to_string(m) + ".csv"));
    const std::size_t e = t.column("error");
    const std::size_t p = t.column("probability");
    const std::size_t n = t.rows.size();
    cdfs_ok = cdfs_ok && n == n_expected;
    for (std::size_t i = 0; i < n && cdfs_ok; ++i) {
      const double pi = std::stod(t.rows[i][p]);
      cdfs_ok = std::abs(pi - static_cast<double>(i + 1) / static_cast<double>(n)) <= 1e-12 &&
                (i == 0 || std::stod(t.rows[i][e]) >= std::stod(t.rows[i - 1][e]));
    }
    cdfs_ok = cdfs_ok && n > 0 && std::stod(t.rows[n - 1][p]) == 1.0;
  }
  return {link_share >= 0.9 && cdfs_ok && links > 0,
          fmt("TOF within 2 samples on %zu/%zu LOS links (%.1f%%), %zu/%zu positions with every link; CDFs %s; %.0f s",
              good, links, link_share * 100, good_pos, position_ok.size(), cdfs_ok ? "complete and monotone" : "BROKEN",
              secs)};
}

// 6. Requested SNR against the active-window power ratio.
Outcome snr_calibration() {
  const double fs_hz = 250000;
  const auto chirp = generate_chirp({45000, 25000, 0.2, 0.8}, fs_hz);
  std::vector<double> x(100000, 0.0);
  std::copy(chirp.begin(), chirp.end(), x.begin() + 25000);
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  double ps = 0;
  std::size_t active = 0;
  for (double v : x)
    if (std::abs(v) > 0.01 * peak) {
      ps += v * v;
      ++active;
    }
  ps /= static_cast<double>(active);

  double worst = 0;
  for (double snr : {0.0, 10.0, 30.0}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto y = add_awgn(x, snr, seed);
      double pn = 0;
      for (std::size_t i = 0; i < x.size(); ++i) pn += (y[i] - x[i]) * (y[i] - x[i]);
      pn /= static_cast<double>(x.size());
      worst = std::max(worst, std::abs(10 * std::log10(ps / pn) - snr));
    }
  }
  return {worst <= 0.2, fmt("worst deviation %.3f dB over 30 seeded 1e5-sample signals", worst)};
}

// 7. Output bytes independent of the worker count.
Outcome determinism(const PipelineConfig& cfg, const fs::path& eight, const ScratchDir& scratch) {
  const auto ref = output_hashes(eight);
  std::size_t mismatched = 0;
  for (std::size_t w : {1u, 4u}) {
    const fs::path out = scratch / ("workers" + std::to_string(w));
    run_desk(cfg, out, w);
    const auto h = output_hashes(out);
    if (h != ref) ++mismatched;
  }
  return {mismatched == 0 && !ref.empty(),
          fmt("%zu files compared for workers 1, 4, 8; %zu runs differ", ref.size(), mismatched)};
}

// 8. Reflection, air attenuation and absorption coefficient properties.
Outcome physics() {
  bool ok = reflection_amplitude(1.0, 0.0) == 1.0 && reflection_amplitude(1.0, 1.0) == 0.0 &&
            std::abs(reflection_amplitude(1.0, 0.43) - std::sqrt(0.57)) <= 1e-15;
  for (double a : {0.0, 0.1, 0.45, 0.9})
    for (double p : {-2.0, 0.3, 1.0}) ok = ok && std::abs(reflection_amplitude(p, a) - p * std::sqrt(1 - a)) <= 1e-15;
  for (double a : {0.0, 0.01, 1.3})
    for (double d : {0.0, 0.5, 7.0}) ok = ok && std::abs(air_absorption_factor(a, d) - std::exp(-a * d)) <= 1e-15;
  double prev = 0;
  bool monotone = true;
  for (double f = 20000; f <= 50000; f += 100) {
    const double a = air_absorption_coefficient(f, 20.0, 0.5);
    monotone = monotone && a >= 0 && a >= prev;
    prev = a;
  }
  return {ok && monotone, fmt("closed forms %s; alpha(20 kHz..50 kHz) %s, alpha(50 kHz) = %.3f Np/m",
                              ok ? "match" : "MISMATCH", monotone ? "nonnegative and nondecreasing" : "NOT monotone",
                              prev)};
}

// 9. Editing snr_db reuses the physical stage.
Outcome snr_edit(PipelineConfig cfg, const fs::path& out) {
  const auto before = output_hashes(out, Stage::physical);
  const std::size_t log_lines = [&] {
    std::istringstream in(io::read_text(out / "stage_log.txt"));
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  }();
  cfg.postprocess.snr_db = 20.0;
  run_desk(cfg, out, 8);

  std::istringstream in(io::read_text(out / "stage_log.txt"));
  std::vector<std::string> fresh;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line); ++n)
    if (n >= log_lines) fresh.push_back(line.substr(0, line.rfind(' ')));
  const std::vector<std::string> expected{"physical reused", "postprocess executed", "positioning executed",
                                          "evaluation executed"};
  const bool same = output_hashes(out, Stage::physical) == before && !before.empty();
  std::string log;
  for (const auto& l : fresh) log += (log.empty() ? "" : "; ") + l;
  return {fresh == expected && same, fmt("log: %s; physical files %s", log.c_str(), same ? "unchanged" : "CHANGED")};
}

}  // namespace

int main() {
  ScratchDir scratch;
  const PipelineConfig desk = load_config(kSourceDir / "configs" / "desk.toml");
  const fs::path desk_out = scratch / "workers8";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 free-field ranging", free_field_ranging},
      {"2 shoebox image source exactness", shoebox_images},
      {"3 RT60 round trip", rt60_round_trip},
      {"4 multilateration oracle equivalence", multilateration},
      {"5 desk scenario", [&] { return desk_scenario(desk, desk_out); }},
      {"6 noise calibration", snr_calibration},
      {"7 determinism across workers", [&] { return determinism(desk, desk_out, scratch); }},
      {"8 physics properties", physics},
      {"9 cache reuse on snr change", [&] { return snr_edit(desk, desk_out); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
