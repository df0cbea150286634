#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace acousim {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kManifestFile = "manifest.json";

/// What a stage produced: every regular file in the stage directory except
/// the manifest itself, with its SHA-256.
struct Manifest {
  std::string stage;
  std::string dependency_hash;
  std::map<std::string, std::string> files;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

Manifest scan_stage_dir(const std::filesystem::path& dir, std::string stage, std::string dependency_hash);
void write_manifest(const std::filesystem::path& dir, const Manifest& m);
std::optional<Manifest> read_manifest(const std::filesystem::path& dir);
/// True when every listed file exists with the recorded hash.
bool verify_manifest(const std::filesystem::path& dir, const Manifest& m);
/// SHA-256 of the manifest file bytes; downstream keys depend on it.
std::string manifest_digest(const std::filesystem::path& dir);

/// Content-addressed store of finished stage directories, keyed by
/// (stage, dependency hash). Files are hard-linked in and out, with a copy
/// fallback across filesystems. Stage directories must be recreated, never
/// rewritten in place, since their files may share inodes with the store.
class StageCache {
 public:
  explicit StageCache(std::filesystem::path root);

  /// ACOUSIM_CACHE_DIR when set, otherwise `<out>/.cache`.
  static std::filesystem::path default_root(const std::filesystem::path& out_dir);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path entry(std::string_view stage, std::string_view hash) const;

  bool contains(std::string_view stage, std::string_view hash) const;
  void store(std::string_view stage, std::string_view hash, const std::filesystem::path& stage_dir) const;
  /// Replaces `stage_dir` with the cached files.
  void restore(std::string_view stage, std::string_view hash, const std::filesystem::path& stage_dir) const;

 private:
  std::filesystem::path root_;
};

}  // namespace acousim
