#include "acousim/evaluation.hpp"

#include "acousim/error.hpp"
#include "acousim/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace acousim {

std::vector<ErrorRecord> compute_errors(std::span<const Truth> truths, std::span<const Estimate> estimates) {
  std::map<std::string, Vec3> truth_by_id;
  for (const Truth& t : truths) {
    if (!truth_by_id.emplace(t.mic_id, t.position).second) {
      fail(ErrorCode::InvalidArgument, "duplicate truth for mic '" + t.mic_id + "'");
    }
  }
  std::set<Method> methods;
  std::set<std::pair<Method, std::string>> covered;
  std::vector<ErrorRecord> out;
  out.reserve(estimates.size());
  for (const Estimate& e : estimates) {
    const auto it = truth_by_id.find(e.mic_id);
    if (it == truth_by_id.end()) fail(ErrorCode::InvalidArgument, "estimate for unknown mic '" + e.mic_id + "'");
    if (!covered.emplace(e.method, e.mic_id).second) {
      fail(ErrorCode::InvalidArgument, "duplicate estimate for mic '" + e.mic_id + "'");
    }
    methods.insert(e.method);
    ErrorRecord r;
    r.mic_id = e.mic_id;
    r.true_position = it->second;
    r.estimated_position = e.position;
    r.error_m = (e.position - it->second).norm();
    r.method = e.method;
    out.push_back(std::move(r));
  }
  for (Method m : methods) {
    for (const auto& [id, pos] : truth_by_id) {
      if (!covered.count({m, id})) {
        fail(ErrorCode::MissingEstimate, std::string("no ") + to_string(m) + " estimate for mic '" + id + "'");
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
    return std::tie(a.method, a.mic_id) < std::tie(b.method, b.mic_id);
  });
  return out;
}

std::vector<ErrorRecord> mean_error_per_position(std::span<const ErrorRecord> records) {
  struct Acc {
    ErrorRecord first;
    Vec3 estimate_sum = Vec3::Zero();
    double error_sum = 0.0;
    int count = 0;
  };
  std::map<std::pair<Method, std::string>, Acc> groups;
  for (const ErrorRecord& r : records) {
    Acc& a = groups[{r.method, r.mic_id}];
    if (a.count == 0) a.first = r;
    a.estimate_sum += r.estimated_position;
    a.error_sum += r.error_m;
    ++a.count;
  }
  std::vector<ErrorRecord> out;
  out.reserve(groups.size());
  for (auto& [key, a] : groups) {
    ErrorRecord r = a.first;
    r.estimated_position = a.estimate_sum / a.count;
    r.error_m = a.error_sum / a.count;
    out.push_back(std::move(r));
  }
  return out;
}

Cdf::Cdf(std::vector<double> errors) : values_(std::move(errors)) {
  if (values_.empty()) fail(ErrorCode::EmptyErrorSet, "cannot build a CDF from no errors");
  for (double v : values_) require(std::isfinite(v), "CDF values must be finite");
  std::sort(values_.begin(), values_.end());
}

std::vector<double> Cdf::probabilities() const {
  std::vector<double> p(values_.size());
  const auto n = static_cast<double>(values_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(i + 1) / n;
  return p;
}

double Cdf::operator()(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double Cdf::quantile(double q) const {
  require(q >= 0.0 && q <= 1.0, "quantile must lie in [0, 1]");
  const auto n = static_cast<double>(values_.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n - 1e-12));
  k = std::clamp<std::size_t>(k, 1, values_.size());
  return values_[k - 1];
}

Cdf empirical_cdf(std::span<const double> errors) { return Cdf(std::vector<double>(errors.begin(), errors.end())); }

std::vector<double> energy_decay_curve_db(std::span<const double> rir) {
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) fail(ErrorCode::InsufficientDecayRange, "RIR carries no energy");
  for (double& v : edc) v = v > 0.0 ? 10.0 * std::log10(v / acc) : -std::numeric_limits<double>::infinity();
  return edc;
}

double schroeder_rt60(std::span<const double> rir, double sample_rate_hz) {
  require(sample_rate_hz > 0.0, "sample rate must be positive");
  constexpr double kUpper = -5.0;
  constexpr double kLower = -25.0;
  constexpr std::size_t kMinSamples = 10;
  const std::vector<double> edc = energy_decay_curve_db(rir);
  const auto first = std::find_if(edc.begin(), edc.end(), [](double v) { return v <= kUpper; });
  const auto last = std::find_if(edc.begin(), edc.end(), [](double v) { return v <= kLower; });
  if (last == edc.end()) fail(ErrorCode::InsufficientDecayRange, "decay curve never reaches -25 dB");
  const auto i0 = static_cast<std::size_t>(first - edc.begin());
  const auto i1 = static_cast<std::size_t>(last - edc.begin());
  if (i1 < i0 + kMinSamples) fail(ErrorCode::InsufficientDecayRange, "too few samples between -5 and -25 dB");
  double st = 0.0;
  double sy = 0.0;
  double stt = 0.0;
  double sty = 0.0;
  const auto n = static_cast<double>(i1 - i0);
  for (std::size_t i = i0; i < i1; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    st += t;
    sy += edc[i];
    stt += t * t;
    sty += t * edc[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  if (!(slope < 0.0)) fail(ErrorCode::InsufficientDecayRange, "decay curve does not decrease");
  return -60.0 / slope;
}

void export_error_map(std::span<const ErrorRecord> records, const Room& room,
                      const std::filesystem::path& map_csv, const std::filesystem::path& outline_csv) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const ErrorRecord& r : records) {
    rows.push_back({io::format_double(r.true_position.x()), io::format_double(r.true_position.y()),
                    io::format_double(r.true_position.z()), io::format_double(r.error_m), to_string(r.method)});
  }
  const std::vector<std::string> header{"x", "y", "z", "error", "method"};
  io::write_csv(map_csv, header, rows);

  std::vector<std::vector<std::string>> outline;
  const auto floor = room.floor();
  for (int level = 0; level < 2; ++level) {
    const double z = level == 0 ? 0.0 : room.height();
    for (std::size_t i = 0; i <= floor.size(); ++i) {
      const Vec2& v = floor[i % floor.size()];
      outline.push_back({std::to_string(level), io::format_double(v.x()), io::format_double(v.y()), io::format_double(z)});
    }
  }
  const std::vector<std::string> outline_header{"level", "x", "y", "z"};
  io::write_csv(outline_csv, outline_header, outline);
}

std::vector<ErrorMapRow> read_error_map(const std::filesystem::path& map_csv) {
  const io::CsvTable t = io::read_csv(map_csv);
  const std::size_t cx = t.column("x");
  const std::size_t cy = t.column("y");
  const std::size_t cz = t.column("z");
  const std::size_t ce = t.column("error");
  const std::size_t cm = t.column("method");
  std::vector<ErrorMapRow> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    ErrorMapRow r;
    r.position = Vec3(io::parse_double(row[cx]), io::parse_double(row[cy]), io::parse_double(row[cz]));
    r.error_m = io::parse_double(row[ce]);
    r.method = row[cm];
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json cdf_plot_spec(const std::map<std::string, Cdf>& cdfs) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [method, cdf] : cdfs) {
    nlohmann::json points = nlohmann::json::array();
    const std::vector<double> p = cdf.probabilities();
    for (std::size_t i = 0; i < cdf.size(); ++i) points.push_back({cdf.values()[i], p[i]});
    series.push_back({{"method", method}, {"points", std::move(points)}});
  }
  return {{"series", std::move(series)}};
}

}  // namespace acousim
