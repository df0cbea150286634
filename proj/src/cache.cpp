#include "acousim/cache.hpp"

#include "acousim/error.hpp"
#include "acousim/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <system_error>

namespace acousim {

namespace fs = std::filesystem;

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) fail(ErrorCode::Io, "SHA-256 init failed");
  }

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) fail(ErrorCode::Io, "SHA-256 update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) fail(ErrorCode::Io, "SHA-256 final failed");
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kDigits[md[i] >> 4];
      out += kDigits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

void link_or_copy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_hard_link(from, to, ec);
  if (ec) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (f) {
    f.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  return h.hex();
}

nlohmann::json Manifest::to_json() const {
  return {{"stage", stage}, {"dependency_hash", dependency_hash}, {"files", files}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    m.stage = j.at("stage").get<std::string>();
    m.dependency_hash = j.at("dependency_hash").get<std::string>();
    m.files = j.at("files").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest scan_stage_dir(const fs::path& dir, std::string stage, std::string dependency_hash) {
  Manifest m;
  m.stage = std::move(stage);
  m.dependency_hash = std::move(dependency_hash);
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == kManifestFile) continue;
    m.files.emplace(rel, sha256_file(e.path()));
  }
  return m;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  io::write_text(dir / kManifestFile, m.to_json().dump(2) + "\n");
}

std::optional<Manifest> read_manifest(const fs::path& dir) {
  const fs::path p = dir / kManifestFile;
  if (!fs::exists(p)) return std::nullopt;
  try {
    return Manifest::from_json(nlohmann::json::parse(io::read_text(p)));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool verify_manifest(const fs::path& dir, const Manifest& m) {
  for (const auto& [name, hash] : m.files) {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p) || sha256_file(p) != hash) return false;
  }
  return true;
}

std::string manifest_digest(const fs::path& dir) { return sha256_file(dir / kManifestFile); }

StageCache::StageCache(fs::path root) : root_(std::move(root)) {}

fs::path StageCache::default_root(const fs::path& out_dir) {
  if (const char* env = std::getenv("ACOUSIM_CACHE_DIR"); env && *env) return fs::path(env);
  return out_dir / ".cache";
}

fs::path StageCache::entry(std::string_view stage, std::string_view hash) const {
  return root_ / std::string(stage) / std::string(hash);
}

bool StageCache::contains(std::string_view stage, std::string_view hash) const {
  const fs::path dir = entry(stage, hash);
  const auto m = read_manifest(dir);
  return m && m->dependency_hash == hash && verify_manifest(dir, *m);
}

void StageCache::store(std::string_view stage, std::string_view hash, const fs::path& stage_dir) const {
  if (contains(stage, hash)) return;
  const fs::path final_dir = entry(stage, hash);
  const fs::path tmp = final_dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::remove_all(final_dir);
  for (const auto& e : fs::recursive_directory_iterator(stage_dir)) {
    if (!e.is_regular_file()) continue;
    const fs::path dst = tmp / fs::relative(e.path(), stage_dir);
    fs::create_directories(dst.parent_path());
    link_or_copy(e.path(), dst);
  }
  fs::rename(tmp, final_dir);
}

void StageCache::restore(std::string_view stage, std::string_view hash, const fs::path& stage_dir) const {
  const fs::path src = entry(stage, hash);
  fs::remove_all(stage_dir);
  fs::create_directories(stage_dir);
  for (const auto& e : fs::recursive_directory_iterator(src)) {
    if (!e.is_regular_file()) continue;
    const fs::path dst = stage_dir / fs::relative(e.path(), src);
    fs::create_directories(dst.parent_path());
    link_or_copy(e.path(), dst);
  }
}

}  // namespace acousim
