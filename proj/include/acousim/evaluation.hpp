#pragma once

#include "acousim/positioning.hpp"
#include "acousim/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace acousim {

struct Truth {
  std::string mic_id;
  Vec3 position = Vec3::Zero();
};

struct Estimate {
  std::string mic_id;
  Method method = Method::gauss_newton;
  Vec3 position = Vec3::Zero();
};

struct ErrorRecord {
  std::string mic_id;
  Vec3 true_position = Vec3::Zero();
  Vec3 estimated_position = Vec3::Zero();
  double error_m = 0.0;
  Method method = Method::gauss_newton;
};

/// One record per estimate, ordered by method then mic id. Every truth needs
/// an estimate for every method that appears.
std::vector<ErrorRecord> compute_errors(std::span<const Truth> truths, std::span<const Estimate> estimates);

/// Mean error per (method, mic) over repeated runs.
std::vector<ErrorRecord> mean_error_per_position(std::span<const ErrorRecord> records);

/// Step CDF with p_i = i / N at the i-th smallest error.
class Cdf {
 public:
  explicit Cdf(std::vector<double> errors);

  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> probabilities() const;
  std::size_t size() const noexcept { return values_.size(); }

  /// F(x) = #{e <= x} / N.
  double operator()(double x) const;
  /// Smallest value v with F(v) >= q.
  double quantile(double q) const;

 private:
  std::vector<double> values_;
};

Cdf empirical_cdf(std::span<const double> errors);

/// Backward-integrated energy in dB relative to the total.
std::vector<double> energy_decay_curve_db(std::span<const double> rir);

/// T20: regression over -5..-25 dB of the decay curve, extrapolated to 60 dB.
double schroeder_rt60(std::span<const double> rir, double sample_rate_hz);

struct ErrorMapRow {
  Vec3 position = Vec3::Zero();
  double error_m = 0.0;
  std::string method;
};

/// Writes `x,y,z,error,method` rows and a closed floor/ceiling outline
/// (`level,x,y,z`, vertex count + 1 points per level).
void export_error_map(std::span<const ErrorRecord> records, const Room& room,
                      const std::filesystem::path& map_csv, const std::filesystem::path& outline_csv);
std::vector<ErrorMapRow> read_error_map(const std::filesystem::path& map_csv);

/// {"series": [{"method": m, "points": [[x, F(x)], ...]}, ...]}
nlohmann::json cdf_plot_spec(const std::map<std::string, Cdf>& cdfs);

}  // namespace acousim
