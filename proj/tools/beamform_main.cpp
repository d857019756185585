// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "beamform/config.hpp"
#include "beamform/errors.hpp"
#include "beamform/runner.hpp"
#include "beamform/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"binaural LCMV beamforming toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool dump_bins = false;

  CLI::App* run = app.add_subcommand("run", "execute the configured method sweep");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_dir, "output directory (default: config output_dir)");
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--threads", threads, "worker threads for the per-bin solvers (0 = auto)");
  run->add_flag("--dump-bins", dump_bins, "also write per-bin filter weights and cue errors");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("--config", config_path, "JSON experiment config")->required();

  CLI::App* version = app.add_subcommand("version", "print the toolkit version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (version->parsed()) {
      std::printf("beamform %s\n", beamform::kVersion);
      return 0;
    }
    if (validate->parsed()) {
      beamform::config::load_config(config_path);
      std::printf("ok: %s\n", config_path.c_str());
      return 0;
    }
    beamform::config::ExperimentConfig cfg = beamform::config::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    beamform::runner::RunOptions options;
    options.threads = threads;
    options.dump_bins = dump_bins;
    const beamform::runner::SweepResult result = beamform::runner::run_experiment(cfg, options);
    const std::string dir =
        out_dir.empty() ? (std::filesystem::path(cfg.base_dir) / cfg.output_dir).string() : out_dir;
    beamform::runner::emit_results(result, cfg, dir);
    std::printf("wrote %zu rows to %s\n", result.rows.size(), dir.c_str());
    return 0;
  } catch (const beamform::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
}
