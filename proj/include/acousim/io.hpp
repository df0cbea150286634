#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acousim::io {

/// Shortest text that parses back to the same double; "nan" for NaN.
std::string format_double(double v);
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws Io when missing.
  std::size_t column(std::string_view name) const;
};

/// Plain comma-separated values without quoting; fields must not contain commas.
void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<std::string>> rows);
CsvTable read_csv(const std::filesystem::path& path);

struct WavData {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
};

/// Mono 32-bit IEEE float WAV.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, double sample_rate_hz);
/// Reads mono float32 or PCM16 WAV.
WavData read_wav(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace acousim::io
