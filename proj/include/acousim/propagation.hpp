#pragma once

#include "acousim/scene.hpp"

#include <span>
#include <vector>

namespace acousim {

/// v = 331.3 * sqrt((273.15 + theta) / 273.15), theta in degC.
double speed_of_sound(double temperature_c);

inline constexpr double kMinAirBandHz = 125.0;
inline constexpr double kMaxAirBandHz = 50000.0;

/// Pure-tone atmospheric absorption in Np/m (amplitude), following the
/// ISO 9613-1 classical plus O2/N2 relaxation model. Valid for 125 Hz..50 kHz.
double air_absorption_coefficient(double frequency_hz, double temperature_c, double relative_humidity);

/// exp(-alpha * d)
double air_absorption_factor(double alpha_np_per_m, double distance_m);

/// a * sqrt(1 - alpha)
double reflection_amplitude(double incident, double alpha_material);

/// Octave centers 125 Hz .. 32 kHz.
std::vector<double> octave_band_centers();

/// Octave bands whose lower edge lies below Nyquist at `sample_rate_hz`.
std::vector<double> simulation_bands(double sample_rate_hz);

/// Per-band air absorption (Np/m) for one environment. All zeros when the
/// environment disables air absorption.
struct AirAbsorptionModel {
  std::vector<double> bands;
  std::vector<double> coefficients;

  static AirAbsorptionModel from_environment(const Environment& env, std::span<const double> bands);
  bool uniform() const;
};

}  // namespace acousim
