#pragma once

#include "acousim/cache.hpp"
#include "acousim/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acousim {

enum class Stage { physical, postprocess, positioning, evaluation };

Stage parse_stage(std::string_view s);
const char* to_string(Stage s);
std::vector<Stage> all_stages();

/// Microphones are simulated in batches of this size; one task per batch.
inline constexpr std::size_t kMicBatch = 10;

struct MicPosition {
  std::string id;   // "<set>_<index>"
  std::string set;  // test, train or dev
  Vec3 position = Vec3::Zero();
};

/// Test grid (or explicit points, optionally thinned to max_test_points by an
/// even stride) followed by the train and dev clouds.
std::vector<MicPosition> build_positions(const PipelineConfig& cfg, const Room& room);

void write_positions(const std::filesystem::path& path, std::span<const MicPosition> positions);
std::vector<MicPosition> read_positions(const std::filesystem::path& path);

/// Key of a stage: its config sections plus the upstream manifest digest.
std::string dependency_hash(const PipelineConfig& cfg, Stage stage, std::string_view upstream_digest);

/// Writes features_{test,train,dev}.csv. Each row is one (position, run):
/// mic_id, run, x, y, z, then fixed_length samples per anchor in speaker order.
/// `features[mic][speaker][run]` holds the fixed-size envelopes.
void export_dataset(const std::filesystem::path& dir, std::span<const MicPosition> positions,
                    std::span<const std::string> anchor_ids,
                    const std::vector<std::vector<std::vector<std::vector<double>>>>& features);

struct RunOptions {
  std::optional<Stage> stage;  // empty runs every stage
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> cache_dir;  // overrides StageCache::default_root
  bool force = false;
};

enum class StageAction { executed, reused, restored };
const char* to_string(StageAction a);

struct StageReport {
  Stage stage = Stage::physical;
  std::string hash;
  StageAction action = StageAction::executed;
};

struct RunReport {
  std::filesystem::path out_dir;
  std::vector<StageReport> stages;
};

/// Runs the requested stages in order. A stage is reused when its directory
/// already carries a verified manifest with the current dependency hash,
/// restored when the cache holds it, and executed otherwise. Each decision is
/// appended to `<out>/stage_log.txt`. Running a single stage needs its
/// upstream outputs present (or cached) under the current config, otherwise
/// UpstreamMissing. Task failures surface as StageFailure after the remaining
/// tasks finish.
RunReport run_pipeline(PipelineConfig cfg, const RunOptions& opts = {});

}  // namespace acousim
