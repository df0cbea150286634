// acousim: run or validate a simulation config.
//
//   acousim run --config FILE [--stage S] [--workers N] [--seed S] [--out DIR] [--force]
//   acousim validate --config FILE
//
// Exit codes: 0 success, 2 invalid config or arguments, 3 stage failure.

#include "acousim/config.hpp"
#include "acousim/error.hpp"
#include "acousim/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitStageFailure = 3;

bool is_config_error(acousim::ErrorCode c) {
  using acousim::ErrorCode;
  return c == ErrorCode::ParseError || c == ErrorCode::UnknownKey || c == ErrorCode::ValidationError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor acoustic simulation and positioning pipeline"};
  app.require_subcommand(1);

  std::string config;
  std::string stage = "all";
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;

  CLI::App* run = app.add_subcommand("run", "Run pipeline stages");
  run->add_option("--config", config, "TOML config file")->required();
  run->add_option("--stage", stage, "physical, postprocess, positioning, evaluation or all")
      ->check(CLI::IsMember({"physical", "postprocess", "positioning", "evaluation", "all"}));
  CLI::Option* workers_opt = run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Master seed");
  CLI::Option* out_opt = run->add_option("--out", out, "Output directory");
  run->add_flag("--force", force, "Ignore cached stage outputs");

  CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config, "TOML config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  acousim::PipelineConfig cfg;
  try {
    cfg = acousim::load_config(config);
  } catch (const acousim::Error& e) {
    std::cerr << e.what() << '\n';
    return is_config_error(e.code()) ? kExitInvalid : kExitStageFailure;
  }

  if (*validate) {
    std::cout << config << ": ok\n";
    return 0;
  }

  acousim::RunOptions opts;
  if (stage != "all") opts.stage = acousim::parse_stage(stage);
  if (*workers_opt) opts.workers = workers;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_dir = out;
  opts.force = force;

  try {
    const acousim::RunReport report = acousim::run_pipeline(std::move(cfg), opts);
    for (const acousim::StageReport& s : report.stages) {
      std::cout << acousim::to_string(s.stage) << ' ' << acousim::to_string(s.action) << ' ' << s.hash << '\n';
    }
    std::cout << "outputs in " << report.out_dir.string() << '\n';
  } catch (const acousim::Error& e) {
    std::cerr << e.what() << '\n';
    return is_config_error(e.code()) ? kExitInvalid : kExitStageFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitStageFailure;
  }
  return 0;
}
