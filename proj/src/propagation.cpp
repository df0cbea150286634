#include "acousim/propagation.hpp"

#include "acousim/error.hpp"

#include <algorithm>
#include <cmath>

namespace acousim {

double speed_of_sound(double temperature_c) {
  if (!(temperature_c >= -20.0 && temperature_c <= 50.0)) {
    fail(ErrorCode::InvalidArgument, "temperature outside [-20, 50] degC");
  }
  return 331.3 * std::sqrt((273.15 + temperature_c) / 273.15);
}

double air_absorption_coefficient(double frequency_hz, double temperature_c, double relative_humidity) {
  if (!(frequency_hz >= kMinAirBandHz * (1.0 - 1e-12) && frequency_hz <= kMaxAirBandHz * (1.0 + 1e-12))) {
    fail(ErrorCode::BandOutOfRange, "air absorption is modelled for 125 Hz .. 50 kHz");
  }
  if (!(relative_humidity >= 0.0 && relative_humidity <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "relative humidity must lie in [0, 1]");
  }
  constexpr double kRefTemp = 293.15;
  constexpr double kTriplePoint = 273.16;
  constexpr double kPressureRatio = 1.0;  // ambient / reference, sea level
  const double temp = temperature_c + 273.15;
  const double f2 = frequency_hz * frequency_hz;

  const double exponent = -6.8346 * std::pow(kTriplePoint / temp, 1.261) + 4.6151;
  const double molar_h2o = 100.0 * relative_humidity * std::pow(10.0, exponent) / kPressureRatio;
  const double fr_o = kPressureRatio * (24.0 + 4.04e4 * molar_h2o * (0.02 + molar_h2o) / (0.391 + molar_h2o));
  const double fr_n = kPressureRatio * std::pow(temp / kRefTemp, -0.5) *
                      (9.0 + 280.0 * molar_h2o * std::exp(-4.170 * (std::pow(temp / kRefTemp, -1.0 / 3.0) - 1.0)));

  const double classical = 1.84e-11 / kPressureRatio * std::sqrt(temp / kRefTemp);
  const double relax = std::pow(temp / kRefTemp, -2.5) *
                       (0.01275 * std::exp(-2239.1 / temp) / (fr_o + f2 / fr_o) +
                        0.1068 * std::exp(-3352.0 / temp) / (fr_n + f2 / fr_n));
  // ISO quotes 8.686 * f^2 * [...] in dB/m; dropping the factor gives Np/m.
  return f2 * (classical + relax);
}

double air_absorption_factor(double alpha_np_per_m, double distance_m) {
  require(alpha_np_per_m >= 0.0 && distance_m >= 0.0, "air absorption needs alpha >= 0 and d >= 0");
  return std::exp(-alpha_np_per_m * distance_m);
}

double reflection_amplitude(double incident, double alpha_material) {
  require(alpha_material >= 0.0 && alpha_material <= 1.0, "absorption coefficient outside [0, 1]");
  return incident * std::sqrt(1.0 - alpha_material);
}

std::vector<double> octave_band_centers() {
  return {125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0, 32000.0};
}

std::vector<double> simulation_bands(double sample_rate_hz) {
  std::vector<double> out;
  for (double c : octave_band_centers()) {
    if (c / std::sqrt(2.0) < 0.5 * sample_rate_hz) out.push_back(c);
  }
  require(!out.empty(), "sample rate too low for the lowest octave band");
  return out;
}

AirAbsorptionModel AirAbsorptionModel::from_environment(const Environment& env, std::span<const double> bands) {
  AirAbsorptionModel m;
  m.bands.assign(bands.begin(), bands.end());
  m.coefficients.resize(bands.size(), 0.0);
  if (!env.air_absorption) return m;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    m.coefficients[b] = air_absorption_coefficient(bands[b], env.temperature_c, env.relative_humidity);
  }
  return m;
}

bool AirAbsorptionModel::uniform() const {
  return std::all_of(coefficients.begin(), coefficients.end(),
                     [&](double c) { return c == coefficients.front(); });
}

}  // namespace acousim
