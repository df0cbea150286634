#include "acousim/io.hpp"

#include "acousim/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace acousim::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(ErrorCode::Io, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorCode::Io, "csv column '" + std::string(name) + "' missing");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot read " + path.string());
  return f;
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail(ErrorCode::Io, "truncated wav file");
  return v;
}

}  // namespace

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<std::string>> rows) {
  std::ofstream f = open_out(path);
  auto line = [&](std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) f << ',';
      f << cells[i];
    }
    f << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!f) fail(ErrorCode::Io, "failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
    } else {
      t.rows.push_back(split(line));
      if (t.rows.back().size() != t.header.size()) fail(ErrorCode::Io, "ragged csv row in " + path.string());
    }
  }
  if (first) fail(ErrorCode::Io, "empty csv " + path.string());
  return t;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, double sample_rate_hz) {
  const auto rate = static_cast<std::uint32_t>(std::llround(sample_rate_hz));
  require(rate > 0, "wav sample rate must be positive");
  const auto n = static_cast<std::uint32_t>(samples.size());
  const std::uint32_t data_bytes = n * 4;
  std::ofstream f = open_out(path);
  f.write("RIFF", 4);
  put<std::uint32_t>(f, 4 + (8 + 18) + (8 + 4) + (8 + data_bytes));
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put<std::uint32_t>(f, 18);
  put<std::uint16_t>(f, 3);  // IEEE float
  put<std::uint16_t>(f, 1);
  put<std::uint32_t>(f, rate);
  put<std::uint32_t>(f, rate * 4);
  put<std::uint16_t>(f, 4);
  put<std::uint16_t>(f, 32);
  put<std::uint16_t>(f, 0);
  f.write("fact", 4);
  put<std::uint32_t>(f, 4);
  put<std::uint32_t>(f, n);
  f.write("data", 4);
  put<std::uint32_t>(f, data_bytes);
  for (double v : samples) put<float>(f, static_cast<float>(v));
  if (!f) fail(ErrorCode::Io, "failed writing " + path.string());
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::array<char, 4> tag{};
  f.read(tag.data(), 4);
  if (!f || std::memcmp(tag.data(), "RIFF", 4) != 0) fail(ErrorCode::Io, path.string() + " is not a RIFF file");
  get<std::uint32_t>(f);
  f.read(tag.data(), 4);
  if (!f || std::memcmp(tag.data(), "WAVE", 4) != 0) fail(ErrorCode::Io, path.string() + " is not a WAVE file");
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  WavData out;
  while (f.read(tag.data(), 4)) {
    const auto size = get<std::uint32_t>(f);
    if (std::memcmp(tag.data(), "fmt ", 4) == 0) {
      format = get<std::uint16_t>(f);
      channels = get<std::uint16_t>(f);
      rate = get<std::uint32_t>(f);
      get<std::uint32_t>(f);
      get<std::uint16_t>(f);
      bits = get<std::uint16_t>(f);
      f.seekg(size - 16 + (size & 1), std::ios::cur);
    } else if (std::memcmp(tag.data(), "data", 4) == 0) {
      if (channels != 1) fail(ErrorCode::Io, path.string() + ": only mono wav is supported");
      out.sample_rate_hz = rate;
      if (format == 3 && bits == 32) {
        out.samples.resize(size / 4);
        for (double& v : out.samples) v = get<float>(f);
      } else if (format == 1 && bits == 16) {
        out.samples.resize(size / 2);
        for (double& v : out.samples) v = get<std::int16_t>(f) / 32768.0;
      } else {
        fail(ErrorCode::Io, path.string() + ": unsupported wav encoding");
      }
      return out;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
    }
  }
  fail(ErrorCode::Io, path.string() + ": no data chunk");
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f = open_out(path);
  f << text;
  if (!f) fail(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace acousim::io
