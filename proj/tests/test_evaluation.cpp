#include "acousim/evaluation.hpp"
#include "acousim/io.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace acousim;

namespace {

Room box(double x, double y, double z) {
  RoomSpec s;
  s.floor_vertices = {{0, 0}, {x, 0}, {x, y}, {0, y}};
  s.height = z;
  s.materials = {Material::flat("m", 0.3)};
  return validate_room(s);
}

// Exponential decay reaching -60 dB in energy after rt60 seconds.
std::vector<double> exponential_ir(double rt60, double fs, double length_s) {
  std::vector<double> h(static_cast<std::size_t>(length_s * fs));
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::pow(10.0, -3.0 * (static_cast<double>(i) / fs) / rt60);
  return h;
}

}  // namespace

TEST_CASE("position errors") {
  const std::vector<Truth> truths{{"a", {0, 0, 0}}, {"b", {1, 1, 1}}};
  const std::vector<Estimate> est{{"a", Method::beck, {3, 4, 0}}, {"b", Method::beck, {1, 1, 1}}};
  const auto rec = compute_errors(truths, est);
  REQUIRE(rec.size() == 2);
  CHECK(rec[0].mic_id == "a");
  CHECK(rec[0].error_m == 5.0);
  CHECK(rec[1].error_m == 0.0);

  const std::vector<Estimate> partial{{"a", Method::beck, {3, 4, 0}}};
  CHECK_ERROR_CODE(compute_errors(truths, partial), ErrorCode::MissingEstimate);
}

TEST_CASE("position errors against a long double oracle and under permutation") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Truth> truths;
  std::vector<Estimate> est;
  for (int i = 0; i < 500; ++i) {
    const std::string id = "m" + std::to_string(i);
    truths.push_back({id, {u(rng), u(rng), u(rng)}});
    for (Method m : {Method::gauss_newton, Method::cheung}) est.push_back({id, m, {u(rng), u(rng), u(rng)}});
  }
  const auto rec = compute_errors(truths, est);
  REQUIRE(rec.size() == est.size());
  for (const ErrorRecord& r : rec) {
    long double s = 0;
    for (int k = 0; k < 3; ++k) {
      const long double d = static_cast<long double>(r.estimated_position[k]) - r.true_position[k];
      s += d * d;
    }
    CHECK(std::abs(r.error_m - static_cast<double>(std::sqrt(s))) <= 1e-12 * std::max(1.0, r.error_m));
  }

  std::shuffle(est.begin(), est.end(), rng);
  std::shuffle(truths.begin(), truths.end(), rng);
  const auto again = compute_errors(truths, est);
  REQUIRE(again.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(again[i].mic_id == rec[i].mic_id);
    CHECK(again[i].method == rec[i].method);
    CHECK(again[i].error_m == rec[i].error_m);
  }
}

TEST_CASE("mean error over runs") {
  std::vector<ErrorRecord> runs{{"a", {0, 0, 0}, {1, 0, 0}, 1.0, Method::beck},
                                {"a", {0, 0, 0}, {3, 0, 0}, 3.0, Method::beck},
                                {"b", {0, 0, 0}, {0, 2, 0}, 2.0, Method::beck}};
  const auto mean = mean_error_per_position(runs);
  REQUIRE(mean.size() == 2);
  CHECK(mean[0].mic_id == "a");
  CHECK(mean[0].error_m == doctest::Approx(2.0));
  CHECK(mean[1].error_m == doctest::Approx(2.0));
}

TEST_CASE("empirical CDF") {
  const Cdf f = empirical_cdf(std::vector<double>{4, 1, 3, 2});
  CHECK(f(2.5) == 0.5);
  CHECK(f(4.0) == 1.0);
  CHECK(f(0.5) == 0.0);
  CHECK(f(2.0) == 0.5);  // right-continuous
  CHECK(f.quantile(0.5) == 2.0);
  const auto p = f.probabilities();
  CHECK(p == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(std::is_sorted(f.values().begin(), f.values().end()));

  CHECK_ERROR_CODE(empirical_cdf(std::vector<double>{}), ErrorCode::EmptyErrorSet);
}

TEST_CASE("CDF quantiles of a known distribution") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  std::vector<double> x(10000);
  for (double& v : x) v = u(rng);
  const Cdf f = empirical_cdf(x);
  CHECK(f.quantile(0.5) == doctest::Approx(1.5).epsilon(0.02));
  CHECK(f.quantile(0.95) == doctest::Approx(1.95).epsilon(0.02));
  double prev = 0;
  for (double t = 0.9; t < 2.1; t += 0.01) {
    CHECK(f(t) >= prev);
    prev = f(t);
  }
  CHECK(f(*std::max_element(x.begin(), x.end())) == 1.0);
}

TEST_CASE("Schroeder RT60") {
  const double fs = 48000;
  CHECK(schroeder_rt60(exponential_ir(0.5, fs, 1.0), fs) == doctest::Approx(0.5).epsilon(0.05));
  const double single = schroeder_rt60(exponential_ir(0.4, fs, 1.0), fs);
  const double doubled = schroeder_rt60(exponential_ir(0.8, fs, 1.6), fs);
  CHECK(doubled / single == doctest::Approx(2.0).epsilon(0.05));

  std::vector<double> impulse(4800, 0.0);
  impulse[10] = 1.0;
  CHECK_ERROR_CODE(schroeder_rt60(impulse, fs), ErrorCode::InsufficientDecayRange);

  const auto edc = energy_decay_curve_db(exponential_ir(0.5, fs, 1.0));
  CHECK(edc.front() == doctest::Approx(0.0));
  for (std::size_t i = 1; i < edc.size(); ++i) CHECK(edc[i] <= edc[i - 1]);
}

TEST_CASE("error map export") {
  testing::TempDir dir("errmap");
  const Room r = box(5, 4, 3);
  const auto grid = generate_test_grid(r, 1.0, 0.5);
  std::vector<ErrorRecord> rec;
  for (Method m : {Method::beck, Method::gauss_newton}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rec.push_back({"test_" + std::to_string(i), grid[i], grid[i] + Vec3(0.01, 0, 0), 0.01 * (1 + static_cast<double>(i) / 7), m});
    }
  }
  export_error_map(rec, r, dir / "map.csv", dir / "outline.csv");
  const auto rows = read_error_map(dir / "map.csv");
  REQUIRE(rows.size() == 120);
  for (const char* m : {"beck", "gauss_newton"}) {
    CHECK(std::count_if(rows.begin(), rows.end(), [&](const ErrorMapRow& row) { return row.method == m; }) == 60);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].position == rec[i].true_position);
    CHECK(rows[i].error_m == rec[i].error_m);
    CHECK(rows[i].method == to_string(rec[i].method));
  }

  const io::CsvTable outline = io::read_csv(dir / "outline.csv");
  REQUIRE(outline.rows.size() == 2 * (r.wall_count() + 1));
  for (std::size_t level = 0; level < 2; ++level) {
    const auto& first = outline.rows[level * (r.wall_count() + 1)];
    const auto& last = outline.rows[level * (r.wall_count() + 1) + r.wall_count()];
    CHECK(first == last);
  }
}

TEST_CASE("CDF plot spec") {
  std::map<std::string, Cdf> cdfs;
  cdfs.emplace("beck", empirical_cdf(std::vector<double>{0.3, 0.1, 0.2}));
  cdfs.emplace("cheung", empirical_cdf(std::vector<double>{0.5}));
  const auto j = cdf_plot_spec(cdfs);
  REQUIRE(j.at("series").size() == 2);
  const auto& beck = j["series"][0];
  CHECK(beck["method"] == "beck");
  REQUIRE(beck["points"].size() == 3);
  CHECK(beck["points"][0][0].get<double>() == 0.1);
  CHECK(beck["points"][2][1].get<double>() == 1.0);
}
