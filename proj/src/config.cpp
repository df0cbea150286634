#include "acousim/config.hpp"

#include "acousim/cache.hpp"
#include "acousim/error.hpp"
#include "acousim/io.hpp"
#include "acousim/propagation.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace acousim {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  fail(ErrorCode::ValidationError, field + ": " + message);
}

// Reads keys from one TOML table and remembers which ones were used so the
// leftovers can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  const toml::node* take(std::string_view key) {
    used_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<double> number(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_number()) invalid(field(key), "expected a number");
    const double v = n->value<double>().value();
    if (!std::isfinite(v)) invalid(field(key), "must be finite");
    return v;
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) invalid(field(key), "expected an integer");
    return n->value<std::int64_t>().value();
  }

  std::optional<std::size_t> count(std::string_view key) {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < 0) invalid(field(key), "must not be negative");
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::uint64_t> seed(std::string_view key) {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < 0) invalid(field(key), "seed must not be negative");
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) invalid(field(key), "expected true or false");
    return n->value<bool>().value();
  }

  std::optional<std::string> string(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) invalid(field(key), "expected a string");
    return n->value<std::string>().value();
  }

  std::optional<std::vector<double>> numbers(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    return number_list(*n, field(key));
  }

  std::optional<Vec3> vec3(std::string_view key) {
    const auto v = numbers(key);
    if (!v) return std::nullopt;
    if (v->size() != 3) invalid(field(key), "expected [x, y, z]");
    return Vec3((*v)[0], (*v)[1], (*v)[2]);
  }

  template <int N>
  std::optional<std::vector<Eigen::Matrix<double, N, 1>>> points(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) invalid(field(key), "expected a list of points");
    std::vector<Eigen::Matrix<double, N, 1>> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string f = field(key) + "[" + std::to_string(i) + "]";
      const std::vector<double> v = number_list(*arr->get(i), f);
      if (v.size() != static_cast<std::size_t>(N)) invalid(f, "expected " + std::to_string(N) + " coordinates");
      Eigen::Matrix<double, N, 1> p;
      for (int k = 0; k < N; ++k) p[k] = v[static_cast<std::size_t>(k)];
      out.push_back(p);
    }
    return out;
  }

  /// Throws UnknownKey for any key that was never taken.
  void finish() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      if (!used_.count(std::string(k.str()))) fail(ErrorCode::UnknownKey, field(k.str()));
    }
  }

  static std::vector<double> number_list(const toml::node& n, const std::string& f) {
    const toml::array* arr = n.as_array();
    if (!arr) invalid(f, "expected a list of numbers");
    std::vector<double> out;
    for (const toml::node& e : *arr) {
      if (!e.is_number()) invalid(f, "expected a list of numbers");
      out.push_back(e.value<double>().value());
      if (!std::isfinite(out.back())) invalid(f, "must be finite");
    }
    return out;
  }

 private:
  const toml::table* table_;
  std::string path_;
  std::set<std::string> used_;
};

const toml::table* subtable(const toml::table& root, std::string_view key) {
  const toml::node* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) invalid(std::string(key), "expected a table");
  return n->as_table();
}

// Re-raises scene/signal errors with the offending config field in front.
template <class F>
void check(const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError || e.code() == ErrorCode::UnknownKey) throw;
    invalid(field, e.what());
  }
}

Material parse_material(const std::string& name, const toml::node& node) {
  const std::string path = "materials." + name;
  if (!node.is_table()) invalid(path, "expected a table");
  Section s(node.as_table(), path);
  const toml::node* absorption = s.take("absorption");
  const auto bands = s.numbers("bands");
  s.finish();
  if (!absorption) invalid(path + ".absorption", "required");
  Material m;
  check(path, [&] {
    if (absorption->is_number()) {
      if (bands) invalid(path + ".bands", "only allowed with a list of absorption coefficients");
      m = Material::flat(name, absorption->value<double>().value());
    } else {
      m = Material(name, bands ? *bands : octave_band_centers(),
                   Section::number_list(*absorption, path + ".absorption"));
    }
  });
  return m;
}

Material resolve_material(const std::string& name, const std::map<std::string, Material>& custom, const std::string& field) {
  const auto it = custom.find(name);
  if (it != custom.end()) return it->second;
  try {
    return builtin_material(name);
  } catch (const Error&) {
    invalid(field, "unknown material '" + name + "'");
  }
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

bool is_integral(double v) { return v > 0.0 && std::floor(v) == v; }

}  // namespace

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    fail(ErrorCode::ParseError, msg.str());
  }

  static const std::set<std::string> kSections{"room", "materials", "environment", "transducers", "signal", "positions",
                                               "simulation", "postprocess", "positioning", "evaluation", "run"};
  for (auto&& [k, v] : root) {
    if (!kSections.count(std::string(k.str()))) fail(ErrorCode::UnknownKey, std::string(k.str()));
  }

  PipelineConfig cfg;

  // [materials]
  std::map<std::string, Material> custom;
  if (const toml::table* t = subtable(root, "materials")) {
    for (auto&& [k, v] : *t) {
      const std::string name(k.str());
      custom.emplace(name, parse_material(name, v));
    }
  }

  // [room]
  {
    const toml::table* t = subtable(root, "room");
    if (!t) invalid("room", "section is required");
    Section s(t, "room");
    const auto floor = s.points<2>("floor");
    const auto height = s.number("height");
    cfg.room.rt60_target = s.number("rt60");
    const toml::node* mats = s.take("materials");
    s.finish();
    if (!floor) invalid("room.floor", "required");
    if (!height) invalid("room.height", "required");
    cfg.room.floor_vertices = *floor;
    cfg.room.height = *height;
    if (mats) {
      if (cfg.room.rt60_target) invalid("room.materials", "cannot be combined with room.rt60");
      if (mats->is_string()) {
        cfg.material_names.push_back(mats->value<std::string>().value());
      } else if (const toml::array* arr = mats->as_array()) {
        for (const toml::node& e : *arr) {
          if (!e.is_string()) invalid("room.materials", "expected material names");
          cfg.material_names.push_back(e.value<std::string>().value());
        }
      } else {
        invalid("room.materials", "expected a name or a list of names");
      }
      const std::size_t surfaces = cfg.room.floor_vertices.size() + 2;
      if (cfg.material_names.size() != 1 && cfg.material_names.size() != surfaces) {
        invalid("room.materials", "give one material or one per surface (" + std::to_string(surfaces) + ")");
      }
      for (std::size_t i = 0; i < cfg.material_names.size(); ++i) {
        cfg.room.materials.push_back(
            resolve_material(cfg.material_names[i], custom, "room.materials[" + std::to_string(i) + "]"));
      }
    } else if (!cfg.room.rt60_target) {
      invalid("room", "set either materials or rt60");
    }
  }

  // [environment]
  {
    Section s(subtable(root, "environment"), "environment");
    Environment& env = cfg.room.environment;
    if (auto v = s.number("temperature_c")) env.temperature_c = *v;
    if (auto v = s.number("relative_humidity")) env.relative_humidity = *v;
    if (auto v = s.boolean("air_absorption")) env.air_absorption = *v;
    s.finish();
  }

  // [transducers]
  {
    const toml::table* t = subtable(root, "transducers");
    if (!t) invalid("transducers", "section is required");
    Section s(t, "transducers");
    TransducerConfig& tc = cfg.transducers;
    if (auto v = s.number("mic_sample_rate")) tc.mic_sample_rate_hz = *v;
    if (auto v = s.number("mic_pattern")) tc.mic_pattern = *v;
    if (auto v = s.vec3("mic_orientation")) tc.mic_orientation = *v;
    if (auto v = s.number("capture_duration")) tc.capture_duration_s = *v;
    const toml::node* speakers = s.take("speakers");
    s.finish();
    if (!speakers || !speakers->is_array_of_tables()) invalid("transducers.speakers", "expected [[transducers.speakers]] entries");
    const toml::array& arr = *speakers->as_array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "transducers.speakers[" + std::to_string(i) + "]";
      Section sp(arr.get(i)->as_table(), path);
      SpeakerConfig c;
      const auto id = sp.string("id");
      const auto pos = sp.vec3("position");
      if (auto v = sp.number("pattern")) c.pattern = *v;
      const auto aim = sp.string("aim");
      c.orientation = sp.vec3("orientation");
      sp.finish();
      if (!id || id->empty()) invalid(path + ".id", "required");
      if (!pos) invalid(path + ".position", "required");
      if (aim && c.orientation) invalid(path, "give either aim or orientation");
      if (aim && *aim != "center") invalid(path + ".aim", "only \"center\" is supported");
      c.id = *id;
      c.position = *pos;
      tc.speakers.push_back(std::move(c));
    }
  }

  // [signal]
  {
    Section s(subtable(root, "signal"), "signal");
    if (auto v = s.number("f_start")) cfg.signal.f_start_hz = *v;
    if (auto v = s.number("f_end")) cfg.signal.f_end_hz = *v;
    if (auto v = s.number("duration")) cfg.signal.duration_s = *v;
    if (auto v = s.number("amplitude")) cfg.signal.amplitude = *v;
    s.finish();
  }

  // [positions]
  {
    Section s(subtable(root, "positions"), "positions");
    PositionsConfig& p = cfg.positions;
    if (auto v = s.number("spacing")) p.spacing = *v;
    if (auto v = s.number("margin")) p.margin = *v;
    if (auto v = s.count("max_test_points")) p.max_test_points = *v;
    if (auto v = s.count("cloud_size")) p.cloud_size = *v;
    if (auto v = s.number("train_ratio")) p.ratios.train = *v;
    if (auto v = s.number("dev_ratio")) p.ratios.dev = *v;
    if (auto v = s.seed("seed")) p.seed = *v;
    if (auto v = s.points<3>("points")) p.points = *v;
    s.finish();
  }

  // [simulation]
  std::optional<std::int64_t> max_order;
  {
    Section s(subtable(root, "simulation"), "simulation");
    SimulationOptions& o = cfg.simulation;
    if (auto v = s.string("mode")) {
      check("simulation.mode", [&] { o.mode = parse_simulation_mode(*v); });
    }
    max_order = s.integer("max_order");
    if (auto v = s.number("sim_rate")) o.sim_rate_hz = *v;
    if (auto v = s.number("rir_duration")) o.rir_duration_s = *v;
    if (auto v = s.count("rays")) o.rays = *v;
    if (auto v = s.number("mic_radius")) o.mic_radius = *v;
    if (auto v = s.number("energy_cutoff")) o.energy_cutoff = *v;
    if (auto v = s.boolean("experimental_mixed_materials")) o.allow_mixed_materials = *v;
    s.finish();
  }

  // [postprocess]
  {
    Section s(subtable(root, "postprocess"), "postprocess");
    PostprocessConfig& p = cfg.postprocess;
    p.snr_db = s.number("snr_db");
    p.sir_db = s.number("sir_db");
    if (auto v = s.string("interferer")) p.interferer = base_dir / *v;
    if (auto v = s.integer("monte_carlo_runs")) {
      if (*v < 1) invalid("postprocess.monte_carlo_runs", "must be at least 1");
      p.monte_carlo_runs = static_cast<int>(*v);
    }
    if (auto v = s.number("envelope_cutoff")) p.envelope_cutoff_hz = *v;
    if (auto v = s.count("fixed_length")) p.fixed_length = *v;
    if (auto v = s.boolean("one_bit")) p.one_bit = *v;
    if (auto v = s.boolean("agc")) p.agc = *v;
    s.finish();
    if (!p.interferer.empty()) {
      check("postprocess.interferer", [&] {
        io::WavData w = io::read_wav(p.interferer);
        if (w.sample_rate_hz != cfg.transducers.mic_sample_rate_hz) {
          invalid("postprocess.interferer", "sample rate differs from transducers.mic_sample_rate");
        }
        p.interferer_samples = std::move(w.samples);
      });
    }
  }

  // [positioning]
  {
    Section s(subtable(root, "positioning"), "positioning");
    PositioningConfig& p = cfg.positioning;
    if (const toml::node* n = s.take("methods")) {
      const toml::array* arr = n->as_array();
      if (!arr) invalid("positioning.methods", "expected a list of method names");
      p.methods.clear();
      for (const toml::node& e : *arr) {
        if (!e.is_string()) invalid("positioning.methods", "expected a list of method names");
        check("positioning.methods", [&] { p.methods.push_back(parse_method(e.value<std::string>().value())); });
      }
      std::set<Method> unique(p.methods.begin(), p.methods.end());
      if (unique.size() != p.methods.size()) invalid("positioning.methods", "duplicate method");
    }
    if (auto v = s.string("tof_mode")) {
      check("positioning.tof_mode", [&] { p.tof.mode = parse_tof_mode(*v); });
    }
    if (auto v = s.number("min_prominence")) p.tof.min_prominence = *v;
    if (auto v = s.boolean("parabolic")) p.tof.parabolic = *v;
    s.finish();
  }

  // [evaluation]
  {
    Section s(subtable(root, "evaluation"), "evaluation");
    EvaluationConfig& e = cfg.evaluation;
    if (auto v = s.boolean("error_map")) e.error_map = *v;
    if (auto v = s.numbers("quantiles")) e.quantiles = *v;
    if (auto v = s.number("tof_tolerance_samples")) e.tof_tolerance_samples = *v;
    s.finish();
  }

  // [run]
  {
    Section s(subtable(root, "run"), "run");
    if (auto v = s.integer("workers")) {
      if (*v < 1) invalid("run.workers", "must be at least 1");
      cfg.run.workers = static_cast<std::size_t>(*v);
    }
    if (auto v = s.string("output_dir")) cfg.run.output_dir = *v;
    if (auto v = s.seed("seed")) cfg.run.seed = *v;
    s.finish();
  }

  // The ISM order follows the reverberation target unless set explicitly.
  if (max_order) {
    if (*max_order < 0) invalid("simulation.max_order", "must not be negative");
    cfg.simulation.max_order = static_cast<int>(*max_order);
  } else if (cfg.room.rt60_target) {
    check("room", [&] { cfg.simulation.max_order = *validate_room(cfg.room).recommended_max_order(); });
  }
  cfg.simulation.capture_duration_s = cfg.transducers.capture_duration_s;

  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  return parse_config(text, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void validate(const PipelineConfig& cfg) {
  Room room;
  check("room", [&] { room = validate_room(cfg.room); });
  check("environment", [&] { validate(cfg.room.environment); });

  const SimulationOptions& sim = cfg.simulation;
  if (!(sim.sim_rate_hz > 0.0) || !is_integral(sim.sim_rate_hz)) invalid("simulation.sim_rate", "must be a positive integer rate");
  if (!(sim.rir_duration_s > 0.0)) invalid("simulation.rir_duration", "must be positive");
  if (sim.rays == 0) invalid("simulation.rays", "must be positive");
  if (!(sim.mic_radius > 0.0)) invalid("simulation.mic_radius", "must be positive");
  if (!(sim.energy_cutoff > 0.0 && sim.energy_cutoff < 1.0)) invalid("simulation.energy_cutoff", "must lie in (0, 1)");

  const TransducerConfig& tc = cfg.transducers;
  if (!is_integral(tc.mic_sample_rate_hz)) invalid("transducers.mic_sample_rate", "must be a positive integer rate");
  if (tc.mic_sample_rate_hz > sim.sim_rate_hz) invalid("transducers.mic_sample_rate", "must not exceed simulation.sim_rate");
  if (!(tc.capture_duration_s > 0.0)) invalid("transducers.capture_duration", "must be positive");
  check("transducers.mic_pattern", [&] { validate(Directivity{tc.mic_pattern, tc.mic_orientation}); });
  if (tc.speakers.empty()) invalid("transducers.speakers", "at least one speaker is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tc.speakers.size(); ++i) {
    const SpeakerConfig& s = tc.speakers[i];
    const std::string path = "transducers.speakers[" + std::to_string(i) + "]";
    if (!ids.insert(s.id).second) invalid(path + ".id", "duplicate speaker id '" + s.id + "'");
    if (s.id.find_first_of(",/\\ ") != std::string::npos) invalid(path + ".id", "must not contain commas, slashes or spaces");
    if (!point_in_room(s.position, room)) invalid(path + ".position", "must lie strictly inside the room");
    if (s.orientation) {
      check(path + ".orientation", [&] { validate(Directivity{s.pattern, *s.orientation}); });
    } else {
      check(path + ".pattern", [&] { validate(Directivity{s.pattern, Vec3::UnitZ()}); });
    }
  }

  check("signal", [&] {
    validate(cfg.signal);
    generate_chirp(cfg.signal, tc.mic_sample_rate_hz);
  });
  const double f_low = std::min(cfg.signal.f_start_hz, cfg.signal.f_end_hz);
  const double f_high = std::max(cfg.signal.f_start_hz, cfg.signal.f_end_hz);
  if (cfg.signal.duration_s > tc.capture_duration_s) invalid("signal.duration", "longer than transducers.capture_duration");
  for (std::size_t i = 0; i < room.surfaces().size(); ++i) {
    const Material& m = room.surfaces()[i].material;
    if (!m.covers(f_low, f_high)) {
      invalid("room.materials", "material '" + m.name() + "' has no bands over the signal spectrum");
    }
  }

  const PositionsConfig& p = cfg.positions;
  if (p.points.empty()) {
    if (!(p.spacing > 0.0)) invalid("positions.spacing", "must be positive");
  }
  if (!(p.margin >= 0.0)) invalid("positions.margin", "must not be negative");
  if (!(p.ratios.train >= 0.0 && p.ratios.dev >= 0.0) || std::abs(p.ratios.train + p.ratios.dev - 1.0) > 1e-9) {
    invalid("positions", "train_ratio and dev_ratio must be nonnegative and sum to 1");
  }
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!point_in_room(p.points[i], room)) {
      invalid("positions.points[" + std::to_string(i) + "]", "must lie strictly inside the room");
    }
  }

  const PostprocessConfig& pp = cfg.postprocess;
  if (pp.sir_db && pp.interferer_samples.empty()) invalid("postprocess.sir_db", "requires postprocess.interferer");
  if (!(pp.envelope_cutoff_hz > 0.0 && pp.envelope_cutoff_hz < 0.5 * tc.mic_sample_rate_hz)) {
    invalid("postprocess.envelope_cutoff", "must lie in (0, mic_sample_rate / 2)");
  }
  const auto capture = static_cast<std::size_t>(std::llround(tc.capture_duration_s * tc.mic_sample_rate_hz));
  if (pp.fixed_length == 1 || pp.fixed_length > capture) {
    invalid("postprocess.fixed_length", "must be 0 or between 2 and the capture length");
  }

  const PositioningConfig& pos = cfg.positioning;
  if (!pos.methods.empty() && tc.speakers.size() < 4) {
    invalid("positioning.methods", "multilateration needs at least 4 speakers");
  }
  if (!(pos.tof.min_prominence >= 0.0 && pos.tof.min_prominence <= 1.0)) {
    invalid("positioning.min_prominence", "must lie in [0, 1]");
  }
  for (double q : cfg.evaluation.quantiles) {
    if (!(q > 0.0 && q <= 1.0)) invalid("evaluation.quantiles", "must lie in (0, 1]");
  }
  if (!(cfg.evaluation.tof_tolerance_samples >= 0.0)) invalid("evaluation.tof_tolerance_samples", "must not be negative");
}

Room build_room(const PipelineConfig& cfg) { return validate_room(cfg.room); }

std::vector<Speaker> build_speakers(const PipelineConfig& cfg, const Room& room) {
  std::vector<Speaker> out;
  for (const SpeakerConfig& c : cfg.transducers.speakers) {
    Speaker s;
    s.id = c.id;
    s.position = c.position;
    s.directivity.pattern = c.pattern;
    if (c.orientation) {
      s.directivity.orientation = *c.orientation;
    } else {
      const Vec3 d = room.center() - c.position;
      require(d.norm() > 0.0, "speaker '" + c.id + "' sits at the room center and cannot aim at it");
      s.directivity.orientation = d.normalized();
    }
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json section_json(const PipelineConfig& cfg, std::string_view section) {
  using nlohmann::json;
  if (section == "room") {
    json floor = json::array();
    for (const Vec2& v : cfg.room.floor_vertices) floor.push_back({v.x(), v.y()});
    return {{"floor", floor}, {"height", cfg.room.height}, {"materials", cfg.material_names},
            {"rt60", optional_json(cfg.room.rt60_target)}};
  }
  if (section == "materials") {
    json out = json::array();
    for (const Material& m : cfg.room.materials) {
      out.push_back({{"name", m.name()},
                     {"bands", std::vector<double>(m.band_centers().begin(), m.band_centers().end())},
                     {"absorption", std::vector<double>(m.coefficients().begin(), m.coefficients().end())}});
    }
    return out;
  }
  if (section == "environment") {
    const Environment& e = cfg.room.environment;
    return {{"temperature_c", e.temperature_c}, {"relative_humidity", e.relative_humidity},
            {"air_absorption", e.air_absorption}};
  }
  if (section == "transducers") {
    const TransducerConfig& t = cfg.transducers;
    json speakers = json::array();
    for (const SpeakerConfig& s : t.speakers) {
      speakers.push_back({{"id", s.id},
                          {"position", vec_json(s.position)},
                          {"pattern", s.pattern},
                          {"orientation", s.orientation ? vec_json(*s.orientation) : json("center")}});
    }
    return {{"speakers", speakers},
            {"mic_sample_rate", t.mic_sample_rate_hz},
            {"mic_pattern", t.mic_pattern},
            {"mic_orientation", vec_json(t.mic_orientation)},
            {"capture_duration", t.capture_duration_s}};
  }
  if (section == "signal") {
    return {{"f_start", cfg.signal.f_start_hz}, {"f_end", cfg.signal.f_end_hz},
            {"duration", cfg.signal.duration_s}, {"amplitude", cfg.signal.amplitude}};
  }
  if (section == "positions") {
    const PositionsConfig& p = cfg.positions;
    json points = json::array();
    for (const Vec3& v : p.points) points.push_back(vec_json(v));
    return {{"spacing", p.spacing}, {"margin", p.margin}, {"max_test_points", p.max_test_points},
            {"cloud_size", p.cloud_size}, {"train_ratio", p.ratios.train}, {"dev_ratio", p.ratios.dev},
            {"seed", p.seed}, {"points", points}};
  }
  if (section == "simulation") {
    const SimulationOptions& o = cfg.simulation;
    return {{"mode", to_string(o.mode)}, {"max_order", o.max_order}, {"sim_rate", o.sim_rate_hz},
            {"rir_duration", o.rir_duration_s}, {"rays", o.rays}, {"mic_radius", o.mic_radius},
            {"energy_cutoff", o.energy_cutoff}, {"experimental_mixed_materials", o.allow_mixed_materials}};
  }
  if (section == "postprocess") {
    const PostprocessConfig& p = cfg.postprocess;
    std::string interferer;
    if (!p.interferer_samples.empty()) {
      std::vector<float> f(p.interferer_samples.begin(), p.interferer_samples.end());
      interferer = sha256_hex(std::string_view(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(float)));
    }
    return {{"snr_db", optional_json(p.snr_db)}, {"sir_db", optional_json(p.sir_db)},
            {"interferer_sha256", interferer}, {"monte_carlo_runs", p.monte_carlo_runs},
            {"envelope_cutoff", p.envelope_cutoff_hz}, {"fixed_length", p.fixed_length},
            {"one_bit", p.one_bit}, {"agc", p.agc}};
  }
  if (section == "positioning") {
    json methods = json::array();
    for (Method m : cfg.positioning.methods) methods.push_back(to_string(m));
    return {{"methods", methods}, {"tof_mode", to_string(cfg.positioning.tof.mode)},
            {"min_prominence", cfg.positioning.tof.min_prominence}, {"parabolic", cfg.positioning.tof.parabolic}};
  }
  if (section == "evaluation") {
    return {{"error_map", cfg.evaluation.error_map}, {"quantiles", cfg.evaluation.quantiles},
            {"tof_tolerance_samples", cfg.evaluation.tof_tolerance_samples}};
  }
  if (section == "run") {
    return {{"workers", cfg.run.workers}, {"output_dir", cfg.run.output_dir.string()}, {"seed", cfg.run.seed}};
  }
  fail(ErrorCode::InvalidArgument, "unknown config section '" + std::string(section) + "'");
}

}  // namespace acousim
