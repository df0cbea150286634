#pragma once

#include "acousim/error.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace testing {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("acousim_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

// Checks that `expr` throws acousim::Error carrying `expected`.
#define CHECK_ERROR_CODE(expr, expected)                                 \
  do {                                                                   \
    bool thrown_ = false;                                                \
    try {                                                                \
      (void)(expr);                                                      \
    } catch (const acousim::Error& e_) {                                 \
      thrown_ = true;                                                    \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());                 \
    }                                                                    \
    CHECK_MESSAGE(thrown_, "no acousim::Error from " #expr);             \
  } while (0)
