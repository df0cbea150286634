#include "acousim/pipeline.hpp"

#include "acousim/error.hpp"
#include "acousim/evaluation.hpp"
#include "acousim/io.hpp"
#include "acousim/parallel.hpp"
#include "acousim/propagation.hpp"
#include "acousim/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace acousim {

namespace fs = std::filesystem;
using nlohmann::json;

Stage parse_stage(std::string_view s) {
  for (Stage st : all_stages()) {
    if (s == to_string(st)) return st;
  }
  fail(ErrorCode::InvalidArgument, "unknown stage '" + std::string(s) + "'");
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::physical: return "physical";
    case Stage::postprocess: return "postprocess";
    case Stage::positioning: return "positioning";
    case Stage::evaluation: return "evaluation";
  }
  return "?";
}

std::vector<Stage> all_stages() {
  return {Stage::physical, Stage::postprocess, Stage::positioning, Stage::evaluation};
}

const char* to_string(StageAction a) {
  switch (a) {
    case StageAction::executed: return "executed";
    case StageAction::reused: return "reused";
    case StageAction::restored: return "restored";
  }
  return "?";
}

namespace {

// Independent random streams per stage.
constexpr std::uint64_t kPhysicalStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::string mic_id(const std::string& set, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return set + "_" + buf;
}

std::string pair_stem(const std::string& speaker, const std::string& mic) { return "s" + speaker + "_m" + mic; }

std::string envelope_file(const std::string& speaker, const std::string& mic, int run) {
  return "env_" + pair_stem(speaker, mic) + "_r" + std::to_string(run) + ".wav";
}

std::string num(double v) { return io::format_double(v); }

std::size_t batch_count(std::size_t n) { return (n + kMicBatch - 1) / kMicBatch; }

std::vector<std::string> speaker_ids(const PipelineConfig& cfg) {
  std::vector<std::string> ids;
  for (const SpeakerConfig& s : cfg.transducers.speakers) ids.push_back(s.id);
  return ids;
}

[[noreturn]] void stage_failed(Stage st, std::span<const TaskFailure> failures, std::span<const MicPosition> mics) {
  std::ostringstream msg;
  msg << to_string(st) << ": " << failures.size() << " task(s) failed";
  for (const TaskFailure& f : failures) {
    const std::size_t first = f.task * kMicBatch;
    const std::size_t last = std::min(first + kMicBatch, mics.size()) - 1;
    msg << "\n  task " << f.task << " (" << mics[first].id << ".." << mics[last].id << "): " << f.message;
  }
  fail(ErrorCode::StageFailure, msg.str());
}

struct StageContext {
  const PipelineConfig& cfg;
  const Room& room;
  fs::path out;
  std::size_t workers = 1;
  std::string hash;

  fs::path dir(Stage s) const { return out / to_string(s); }
};

// --- physical ----------------------------------------------------------------

void run_physical(const StageContext& ctx) {
  const PipelineConfig& cfg = ctx.cfg;
  const fs::path dir = ctx.dir(Stage::physical);
  const std::vector<MicPosition> positions = build_positions(cfg, ctx.room);
  write_positions(dir / "positions.csv", positions);

  const double mic_rate = cfg.transducers.mic_sample_rate_hz;
  const std::vector<double> emitted = generate_chirp(cfg.signal, cfg.simulation.sim_rate_hz);
  io::write_wav(dir / "template.wav", generate_chirp(cfg.signal, mic_rate), mic_rate);

  const std::vector<Speaker> speakers = build_speakers(cfg, ctx.room);
  std::vector<Microphone> mics;
  for (const MicPosition& p : positions) {
    mics.push_back({p.id, p.position, Directivity{cfg.transducers.mic_pattern, cfg.transducers.mic_orientation}, mic_rate});
  }

  auto task = [&](std::size_t t, std::uint64_t seed) {
    const std::size_t first = t * kMicBatch;
    const std::size_t n = std::min(kMicBatch, mics.size() - first);
    SimulationOptions opts = cfg.simulation;
    opts.seed = seed;
    const std::span<const Microphone> batch(mics.data() + first, n);
    for (const Channel& ch : simulate_room(ctx.room, speakers, batch, emitted, opts)) {
      const Speaker& s = speakers[ch.speaker];
      const Microphone& m = batch[ch.mic];
      const std::string stem = pair_stem(s.id, m.id);
      io::write_wav(dir / ("rir_" + stem + ".wav"), ch.rir.samples, ch.rir.sample_rate_hz);
      io::write_wav(dir / ("rx_" + stem + ".wav"), ch.received, m.sample_rate_hz);
      const json sidecar{{"speaker_id", s.id},
                         {"mic_id", m.id},
                         {"speaker_position", {s.position.x(), s.position.y(), s.position.z()}},
                         {"mic_position", {m.position.x(), m.position.y(), m.position.z()}},
                         {"rir", "rir_" + stem + ".wav"},
                         {"rir_sample_rate", ch.rir.sample_rate_hz},
                         {"received", "rx_" + stem + ".wav"},
                         {"received_sample_rate", m.sample_rate_hz},
                         {"config_hash", ctx.hash}};
      io::write_text(dir / (stem + ".json"), sidecar.dump(2) + "\n");
    }
    return n;
  };
  const auto res = run_parallel(batch_count(mics.size()), ctx.workers, derive_seed(cfg.run.seed, {kPhysicalStream}), task);
  if (!res.failures.empty()) stage_failed(Stage::physical, res.failures, positions);
}

// --- postprocess -------------------------------------------------------------

void run_postprocess(const StageContext& ctx) {
  const PipelineConfig& cfg = ctx.cfg;
  const PostprocessConfig& pc = cfg.postprocess;
  const fs::path phys = ctx.dir(Stage::physical);
  const fs::path dir = ctx.dir(Stage::postprocess);
  const std::vector<MicPosition> positions = read_positions(phys / "positions.csv");
  const std::vector<double> templ = io::read_wav(phys / "template.wav").samples;
  const std::vector<std::string> ids = speaker_ids(cfg);
  const std::size_t n_speakers = ids.size();
  const auto runs = static_cast<std::size_t>(pc.monte_carlo_runs);

  PostprocessOptions opts;
  opts.sample_rate_hz = cfg.transducers.mic_sample_rate_hz;
  opts.envelope_cutoff_hz = pc.envelope_cutoff_hz;
  opts.fixed_length = pc.fixed_length;
  opts.one_bit = pc.one_bit;
  opts.agc = pc.agc;
  const std::uint64_t noise_seed = derive_seed(cfg.run.seed, {kNoiseStream});

  using Features = std::vector<std::vector<std::vector<double>>>;  // [speaker][run]
  auto task = [&](std::size_t t, std::uint64_t) {
    const std::size_t first = t * kMicBatch;
    const std::size_t n = std::min(kMicBatch, positions.size() - first);
    std::vector<Features> out(n, Features(n_speakers, std::vector<std::vector<double>>(runs)));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = first + i;
      for (std::size_t s = 0; s < n_speakers; ++s) {
        const io::WavData rx = io::read_wav(phys / ("rx_" + pair_stem(ids[s], positions[m].id) + ".wav"));
        for (std::size_t r = 0; r < runs; ++r) {
          // The stream depends on (mic, speaker, run) only, never on batching.
          const std::uint64_t seed = sweep_seed(noise_seed, 0, r, m * n_speakers + s);
          const ProcessedSignal p = postprocess(rx.samples, templ, pc.snr_db, pc.sir_db, pc.interferer_samples, seed, opts);
          io::write_wav(dir / envelope_file(ids[s], positions[m].id, static_cast<int>(r)), p.envelope.samples,
                        p.envelope.sample_rate_hz);
          if (p.features) out[i][s][r] = p.features->samples;
        }
      }
    }
    return out;
  };
  const auto res = run_parallel(batch_count(positions.size()), ctx.workers, noise_seed, task);
  if (!res.failures.empty()) stage_failed(Stage::postprocess, res.failures, positions);

  json files = json::array();
  for (const MicPosition& p : positions) {
    for (const std::string& s : ids) {
      for (std::size_t r = 0; r < runs; ++r) {
        files.push_back({{"file", envelope_file(s, p.id, static_cast<int>(r))},
                         {"speaker_id", s},
                         {"mic_id", p.id},
                         {"mc_index", r}});
      }
    }
  }
  const json index{{"snr_db", pc.snr_db ? json(*pc.snr_db) : json(nullptr)},
                   {"sir_db", pc.sir_db ? json(*pc.sir_db) : json(nullptr)},
                   {"monte_carlo_runs", runs},
                   {"fixed_length", pc.fixed_length},
                   {"sample_rate", opts.sample_rate_hz},
                   {"config_hash", ctx.hash},
                   {"envelopes", files}};
  io::write_text(dir / "envelopes.json", index.dump(2) + "\n");

  if (pc.fixed_length > 0) {
    std::vector<Features> features;
    for (const auto& batch : res.results) {
      for (const Features& f : *batch) features.push_back(f);
    }
    export_dataset(dir, positions, ids, features);
  }
}

// --- positioning -------------------------------------------------------------

void run_positioning(const StageContext& ctx) {
  const PipelineConfig& cfg = ctx.cfg;
  const fs::path post = ctx.dir(Stage::postprocess);
  const fs::path dir = ctx.dir(Stage::positioning);
  const std::vector<MicPosition> positions = read_positions(ctx.dir(Stage::physical) / "positions.csv");
  const std::vector<std::string> ids = speaker_ids(cfg);
  const int runs = cfg.postprocess.monte_carlo_runs;
  const double c = speed_of_sound(cfg.room.environment.temperature_c);

  std::vector<Anchor> anchors;
  for (const SpeakerConfig& s : cfg.transducers.speakers) anchors.push_back({s.id, s.position});
  const AnchorSet anchor_set(anchors);

  using Rows = std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>;
  auto task = [&](std::size_t t, std::uint64_t) {
    const std::size_t first = t * kMicBatch;
    const std::size_t n = std::min(kMicBatch, positions.size() - first);
    Rows rows;
    for (std::size_t m = first; m < first + n; ++m) {
      const std::string& mic = positions[m].id;
      for (int r = 0; r < runs; ++r) {
        std::vector<RangeEstimate> ranges;
        for (const std::string& s : ids) {
          const io::WavData w = io::read_wav(post / envelope_file(s, mic, r));
          CompressedEnvelope env{w.samples, w.sample_rate_hz, std::nullopt};
          const RangeEstimate re = make_range(s, estimate_tof(env, cfg.positioning.tof), c);
          rows.first.push_back({mic, s, num(re.tof_s), num(re.range_m), std::to_string(r)});
          ranges.push_back(re);
        }
        for (Method method : cfg.positioning.methods) {
          const PositionEstimate e = multilaterate(anchor_set, ranges, method);
          rows.second.push_back({mic, to_string(method), num(e.position.x()), num(e.position.y()), num(e.position.z()),
                                 num(e.residual_rms), e.converged ? "true" : "false", std::to_string(r)});
        }
      }
    }
    return rows;
  };
  const auto res = run_parallel(batch_count(positions.size()), ctx.workers, cfg.run.seed, task);
  if (!res.failures.empty()) stage_failed(Stage::positioning, res.failures, positions);

  std::vector<std::vector<std::string>> ranges;
  std::vector<std::vector<std::string>> estimates;
  for (const auto& batch : res.results) {
    ranges.insert(ranges.end(), batch->first.begin(), batch->first.end());
    estimates.insert(estimates.end(), batch->second.begin(), batch->second.end());
  }
  const std::vector<std::string> range_header{"mic_id", "anchor_id", "tof_s", "range_m", "run"};
  const std::vector<std::string> estimate_header{"mic_id", "method", "x", "y", "z", "residual_rms", "converged", "run"};
  io::write_csv(dir / "ranges.csv", range_header, ranges);
  io::write_csv(dir / "estimates.csv", estimate_header, estimates);
}

// --- evaluation --------------------------------------------------------------

void run_evaluation(const StageContext& ctx) {
  const PipelineConfig& cfg = ctx.cfg;
  const fs::path pos_dir = ctx.dir(Stage::positioning);
  const fs::path dir = ctx.dir(Stage::evaluation);
  const std::vector<MicPosition> positions = read_positions(ctx.dir(Stage::physical) / "positions.csv");
  std::map<std::string, const MicPosition*> by_id;
  for (const MicPosition& p : positions) by_id[p.id] = &p;
  std::map<std::string, Vec3> speakers;
  for (const SpeakerConfig& s : cfg.transducers.speakers) speakers[s.id] = s.position;
  const double c = speed_of_sound(cfg.room.environment.temperature_c);
  const double rate = cfg.transducers.mic_sample_rate_hz;
  const double tol = cfg.evaluation.tof_tolerance_samples;

  // Direct-path TOF error against the geometric delay.
  const io::CsvTable ranges = io::read_csv(pos_dir / "ranges.csv");
  std::vector<std::vector<std::string>> tof_rows;
  std::map<std::string, bool> position_ok;
  std::map<std::string, bool> position_los;
  std::size_t pairs_los = 0;
  std::size_t pairs_ok = 0;
  for (const auto& row : ranges.rows) {
    const std::string& mic = row[ranges.column("mic_id")];
    const std::string& anchor = row[ranges.column("anchor_id")];
    const auto it = by_id.find(mic);
    if (it == by_id.end()) fail(ErrorCode::UpstreamMissing, "ranges.csv names unknown mic '" + mic + "'");
    const Vec3& spk = speakers.at(anchor);
    const Vec3& p = it->second->position;
    const double tof = io::parse_double(row[ranges.column("tof_s")]);
    const double truth = (p - spk).norm() / c;
    const double err = (tof - truth) * rate;
    const bool los = !ctx.room.segment_blocked(spk, p, -1, -1);
    const bool ok = std::abs(err) <= tol;
    if (!position_ok.count(mic)) {
      position_ok[mic] = true;
      position_los[mic] = true;
    }
    position_los[mic] = position_los[mic] && los;
    position_ok[mic] = position_ok[mic] && ok;
    if (los) {
      ++pairs_los;
      pairs_ok += ok ? 1 : 0;
    }
    tof_rows.push_back({mic, anchor, row[ranges.column("run")], row[ranges.column("tof_s")], num(truth), num(err),
                        los ? "true" : "false"});
  }
  const std::vector<std::string> tof_header{"mic_id", "anchor_id", "run", "tof_s", "true_tof_s", "error_samples", "los"};
  io::write_csv(dir / "tof_errors.csv", tof_header, tof_rows);
  std::size_t los_positions = 0;
  std::size_t ok_positions = 0;
  for (const auto& [mic, los] : position_los) {
    if (!los) continue;
    ++los_positions;
    ok_positions += position_ok[mic] ? 1 : 0;
  }

  json summary;
  summary["tof"] = {{"tolerance_samples", tol},
                    {"los_positions", los_positions},
                    {"positions_within_tolerance", ok_positions},
                    {"position_fraction", los_positions ? double(ok_positions) / double(los_positions) : 0.0},
                    {"los_pairs", pairs_los},
                    {"pairs_within_tolerance", pairs_ok}};

  // Position errors: Euclidean error per run, then the mean over runs (MED).
  const io::CsvTable est = io::read_csv(pos_dir / "estimates.csv");
  std::map<int, std::vector<Estimate>> per_run;
  for (const auto& row : est.rows) {
    Estimate e;
    e.mic_id = row[est.column("mic_id")];
    e.method = parse_method(row[est.column("method")]);
    e.position = Vec3(io::parse_double(row[est.column("x")]), io::parse_double(row[est.column("y")]),
                      io::parse_double(row[est.column("z")]));
    per_run[std::stoi(row[est.column("run")])].push_back(std::move(e));
  }
  std::vector<Truth> truths;
  for (const MicPosition& p : positions) truths.push_back({p.id, p.position});
  std::vector<ErrorRecord> all;
  for (const auto& [run, estimates] : per_run) {
    const std::vector<ErrorRecord> r = compute_errors(truths, estimates);
    all.insert(all.end(), r.begin(), r.end());
  }
  const std::vector<ErrorRecord> med = mean_error_per_position(all);

  std::vector<std::vector<std::string>> error_rows;
  std::map<std::string, std::vector<double>> test_errors;
  std::vector<ErrorRecord> test_records;
  for (const ErrorRecord& r : med) {
    const MicPosition& p = *by_id.at(r.mic_id);
    error_rows.push_back({r.mic_id, p.set, to_string(r.method), num(r.true_position.x()), num(r.true_position.y()),
                          num(r.true_position.z()), num(r.estimated_position.x()), num(r.estimated_position.y()),
                          num(r.estimated_position.z()), num(r.error_m)});
    if (p.set == "test") {
      test_errors[to_string(r.method)].push_back(r.error_m);
      test_records.push_back(r);
    }
  }
  const std::vector<std::string> error_header{"mic_id", "set", "method", "x", "y", "z", "est_x", "est_y", "est_z", "error"};
  io::write_csv(dir / "errors.csv", error_header, error_rows);

  std::map<std::string, Cdf> cdfs;
  json methods = json::object();
  for (const auto& [method, errors] : test_errors) {
    const Cdf& cdf = cdfs.emplace(method, Cdf(errors)).first->second;
    std::vector<std::vector<std::string>> rows;
    const std::vector<double> p = cdf.probabilities();
    for (std::size_t i = 0; i < cdf.size(); ++i) rows.push_back({num(cdf.values()[i]), num(p[i])});
    const std::vector<std::string> header{"error", "probability"};
    io::write_csv(dir / ("cdf_" + method + ".csv"), header, rows);
    double mean = 0.0;
    for (double e : errors) mean += e;
    json quantiles = json::object();
    for (double q : cfg.evaluation.quantiles) quantiles[num(q)] = cdf.quantile(q);
    methods[method] = {{"positions", errors.size()}, {"mean_error", mean / double(errors.size())}, {"quantiles", quantiles}};
  }
  summary["methods"] = methods;
  if (!cdfs.empty()) io::write_text(dir / "cdf_plot.json", cdf_plot_spec(cdfs).dump(2) + "\n");
  if (cfg.evaluation.error_map && !test_records.empty()) {
    export_error_map(test_records, ctx.room, dir / "error_map.csv", dir / "outline.csv");
  }
  summary["config_hash"] = ctx.hash;
  io::write_text(dir / "summary.json", summary.dump(2) + "\n");
}

void run_stage(Stage st, const StageContext& ctx) {
  switch (st) {
    case Stage::physical: return run_physical(ctx);
    case Stage::postprocess: return run_postprocess(ctx);
    case Stage::positioning: return run_positioning(ctx);
    case Stage::evaluation: return run_evaluation(ctx);
  }
}

void append_log(const fs::path& out, const std::string& line) {
  fs::create_directories(out);
  std::ofstream f(out / "stage_log.txt", std::ios::app);
  if (!f) fail(ErrorCode::Io, "cannot append to " + (out / "stage_log.txt").string());
  f << line << '\n';
}

bool stage_current(const fs::path& dir, const std::string& hash) {
  const auto m = read_manifest(dir);
  return m && m->dependency_hash == hash && verify_manifest(dir, *m);
}

}  // namespace

std::vector<MicPosition> build_positions(const PipelineConfig& cfg, const Room& room) {
  const PositionsConfig& pc = cfg.positions;
  std::vector<Vec3> grid = pc.points.empty() ? generate_test_grid(room, pc.spacing, pc.margin) : pc.points;
  std::vector<Vec3> test = grid;
  if (pc.max_test_points > 0 && pc.max_test_points < grid.size()) {
    test.clear();
    for (std::size_t i = 0; i < pc.max_test_points; ++i) test.push_back(grid[i * grid.size() / pc.max_test_points]);
  }
  Cloud cloud;
  if (pc.cloud_size > 0) {
    cloud = generate_train_dev_cloud(room, grid, pc.spacing, pc.cloud_size, pc.ratios, pc.margin, pc.seed);
  }
  std::vector<MicPosition> out;
  auto add = [&](const std::vector<Vec3>& pts, const std::string& set) {
    for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({mic_id(set, i), set, pts[i]});
  };
  add(test, "test");
  add(cloud.train, "train");
  add(cloud.dev, "dev");
  return out;
}

void write_positions(const fs::path& path, std::span<const MicPosition> positions) {
  std::vector<std::vector<std::string>> rows;
  for (const MicPosition& p : positions) {
    rows.push_back({num(p.position.x()), num(p.position.y()), num(p.position.z()), p.set});
  }
  const std::vector<std::string> header{"x", "y", "z", "set"};
  io::write_csv(path, header, rows);
}

std::vector<MicPosition> read_positions(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::UpstreamMissing, path.string() + " not found");
  const io::CsvTable t = io::read_csv(path);
  std::map<std::string, std::size_t> counts;
  std::vector<MicPosition> out;
  for (const auto& row : t.rows) {
    MicPosition p;
    p.set = row[t.column("set")];
    p.id = mic_id(p.set, counts[p.set]++);
    p.position = Vec3(io::parse_double(row[t.column("x")]), io::parse_double(row[t.column("y")]),
                      io::parse_double(row[t.column("z")]));
    out.push_back(std::move(p));
  }
  return out;
}

std::string dependency_hash(const PipelineConfig& cfg, Stage stage, std::string_view upstream_digest) {
  std::vector<std::string> sections;
  bool seeded = false;
  switch (stage) {
    case Stage::physical:
      sections = {"room", "materials", "environment", "transducers", "signal", "positions", "simulation"};
      seeded = true;
      break;
    case Stage::postprocess:
      sections = {"postprocess"};
      seeded = true;
      break;
    case Stage::positioning:
      sections = {"environment", "transducers", "positioning"};
      break;
    case Stage::evaluation:
      sections = {"evaluation"};
      break;
  }
  json key{{"stage", to_string(stage)}, {"upstream", std::string(upstream_digest)}};
  for (const std::string& s : sections) key["sections"][s] = section_json(cfg, s);
  if (seeded) key["seed"] = cfg.run.seed;
  return sha256_hex(key.dump());
}

void export_dataset(const fs::path& dir, std::span<const MicPosition> positions, std::span<const std::string> anchor_ids,
                    const std::vector<std::vector<std::vector<std::vector<double>>>>& features) {
  if (features.size() != positions.size()) fail(ErrorCode::MissingFeatures, "feature count differs from position count");
  std::size_t width = 0;
  for (std::size_t m = 0; m < positions.size(); ++m) {
    if (features[m].size() != anchor_ids.size()) fail(ErrorCode::MissingFeatures, "missing anchors for " + positions[m].id);
    for (const auto& per_run : features[m]) {
      if (per_run.empty()) fail(ErrorCode::MissingFeatures, "no runs for " + positions[m].id);
      for (const auto& f : per_run) {
        if (f.empty()) fail(ErrorCode::MissingFeatures, "empty features for " + positions[m].id);
        if (width == 0) width = f.size();
        if (f.size() != width) fail(ErrorCode::MissingFeatures, "ragged features for " + positions[m].id);
      }
    }
  }
  std::vector<std::string> header{"mic_id", "run", "x", "y", "z"};
  for (const std::string& a : anchor_ids) {
    for (std::size_t i = 0; i < width; ++i) header.push_back(a + "_" + std::to_string(i));
  }
  std::map<std::string, std::vector<std::vector<std::string>>> rows{{"test", {}}, {"train", {}}, {"dev", {}}};
  for (std::size_t m = 0; m < positions.size(); ++m) {
    const MicPosition& p = positions[m];
    const std::size_t runs = features[m][0].size();
    for (std::size_t r = 0; r < runs; ++r) {
      std::vector<std::string> row{p.id, std::to_string(r), num(p.position.x()), num(p.position.y()), num(p.position.z())};
      for (std::size_t a = 0; a < anchor_ids.size(); ++a) {
        if (features[m][a].size() != runs) fail(ErrorCode::MissingFeatures, "run count differs for " + p.id);
        for (double v : features[m][a][r]) row.push_back(num(static_cast<float>(v)));
      }
      rows[p.set].push_back(std::move(row));
    }
  }
  for (const auto& [set, r] : rows) io::write_csv(dir / ("features_" + set + ".csv"), header, r);
}

RunReport run_pipeline(PipelineConfig cfg, const RunOptions& opts) {
  if (opts.seed) cfg.run.seed = *opts.seed;
  if (opts.workers) {
    require(*opts.workers >= 1, "workers must be at least 1");
    cfg.run.workers = *opts.workers;
  }
  if (opts.out_dir) cfg.run.output_dir = *opts.out_dir;
  const fs::path out = cfg.run.output_dir;
  const StageCache cache(opts.cache_dir ? *opts.cache_dir : StageCache::default_root(out));
  const Room room = build_room(cfg);

  RunReport report;
  report.out_dir = out;
  fs::create_directories(out);
  std::string upstream;
  for (Stage st : all_stages()) {
    const bool requested = !opts.stage || *opts.stage == st;
    if (opts.stage && st > *opts.stage) break;
    StageContext ctx{cfg, room, out, cfg.run.workers, dependency_hash(cfg, st, upstream)};
    const fs::path dir = ctx.dir(st);
    StageAction action = StageAction::executed;
    if (!requested) {
      // Upstream of a single requested stage: must already exist.
      if (stage_current(dir, ctx.hash)) {
        action = StageAction::reused;
      } else if (cache.contains(to_string(st), ctx.hash)) {
        cache.restore(to_string(st), ctx.hash, dir);
        action = StageAction::restored;
      } else {
        fail(ErrorCode::UpstreamMissing, std::string(to_string(st)) + " outputs are missing or stale; run that stage first");
      }
    } else if (!opts.force && stage_current(dir, ctx.hash)) {
      action = StageAction::reused;
    } else if (!opts.force && cache.contains(to_string(st), ctx.hash)) {
      cache.restore(to_string(st), ctx.hash, dir);
      action = StageAction::restored;
    } else {
      fs::remove_all(dir);
      fs::create_directories(dir);
      try {
        run_stage(st, ctx);
      } catch (const Error& e) {
        append_log(out, std::string(to_string(st)) + " failed " + ctx.hash);
        if (e.code() == ErrorCode::StageFailure || e.code() == ErrorCode::UpstreamMissing) throw;
        fail(ErrorCode::StageFailure, std::string(to_string(st)) + ": " + e.what());
      }
      write_manifest(dir, scan_stage_dir(dir, to_string(st), ctx.hash));
      cache.store(to_string(st), ctx.hash, dir);
    }
    append_log(out, std::string(to_string(st)) + " " + to_string(action) + " " + ctx.hash);
    report.stages.push_back({st, ctx.hash, action});
    upstream = manifest_digest(dir);
  }
  return report;
}

}  // namespace acousim
