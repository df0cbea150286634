#pragma once

#include "acousim/positioning.hpp"
#include "acousim/scene.hpp"
#include "acousim/signal.hpp"
#include "acousim/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acousim {

struct SpeakerConfig {
  std::string id;
  Vec3 position = Vec3::Zero();
  double pattern = 1.0;
  // Aimed at the room center unless an explicit orientation is given.
  std::optional<Vec3> orientation;
};

struct TransducerConfig {
  std::vector<SpeakerConfig> speakers;
  double mic_sample_rate_hz = 250000.0;
  double mic_pattern = 1.0;
  Vec3 mic_orientation = Vec3::UnitZ();
  double capture_duration_s = 0.1;
};

struct PositionsConfig {
  double spacing = 1.0;
  double margin = 0.5;
  std::size_t max_test_points = 0;  // 0 keeps the whole grid
  std::size_t cloud_size = 0;
  CloudRatios ratios;
  std::uint64_t seed = 0;
  std::vector<Vec3> points;  // explicit test points replace the grid
};

struct PostprocessConfig {
  std::optional<double> snr_db;
  std::optional<double> sir_db;
  std::filesystem::path interferer;  // mono WAV at the microphone rate
  std::vector<double> interferer_samples;
  int monte_carlo_runs = 1;
  double envelope_cutoff_hz = kDefaultEnvelopeCutoffHz;
  std::size_t fixed_length = 0;
  bool one_bit = false;
  bool agc = false;
};

struct PositioningConfig {
  std::vector<Method> methods = all_methods();
  TofOptions tof;
};

struct EvaluationConfig {
  bool error_map = true;
  std::vector<double> quantiles{0.5, 0.9};
  double tof_tolerance_samples = 2.0;
};

struct RunConfig {
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
};

struct PipelineConfig {
  RoomSpec room;
  TransducerConfig transducers;
  ChirpSpec signal;
  PositionsConfig positions;
  SimulationOptions simulation;
  PostprocessConfig postprocess;
  PositioningConfig positioning;
  EvaluationConfig evaluation;
  RunConfig run;

  std::vector<std::string> material_names;  // as written in [room].materials
};

/// Parses, defaults and validates. Relative paths resolve against `base_dir`.
/// Throws ParseError, UnknownKey or ValidationError (message starts with the
/// field path).
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = ".");

/// Cross-field checks; load_config already runs them.
void validate(const PipelineConfig& cfg);

Room build_room(const PipelineConfig& cfg);
std::vector<Speaker> build_speakers(const PipelineConfig& cfg, const Room& room);

/// Canonical, defaulted form of one config section, used for cache keys.
/// Sections: room, materials, environment, transducers, signal, positions,
/// simulation, postprocess, positioning, evaluation, run.
nlohmann::json section_json(const PipelineConfig& cfg, std::string_view section);

}  // namespace acousim
