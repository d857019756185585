// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "beamform/config.hpp"
#include "beamform/engine.hpp"
#include "beamform/types.hpp"

namespace beamform::runner {

struct SweepRow {
  std::string method;
  int r = 0;
  double c = std::numeric_limits<double>::quiet_NaN();  // NaN when not applicable
  int k_max = 0;                                        // 0 when not applicable
  double gs_snr_in_db = 0.0;
  double gs_snr_out_db = 0.0;
  double gs_snr_gain_db = 0.0;
  double tot_er_itf = 0.0;
  double tot_er_ild = 0.0;
  double tot_er_ipd = 0.0;
  double av_er_itf = 0.0;
  double mean_iterations = 0.0;
  int fallback_bins = 0;
  int exhausted_bins = 0;
  int degenerate_bins = 0;
  int ratio_excluded = 0;
  double out_rms_left = 0.0;   // processed-signal diagnostics
  double out_rms_right = 0.0;
  std::uint64_t seed = 0;
  std::map<int, int> iteration_histogram;
};

struct BinDump {
  std::string method;
  int r = 0;
  std::vector<lcmv::BinauralFilter> filters;
  std::vector<double> itf_errors;  // flattened (interferer-major) per bin
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<BinDump> bin_dumps;  // filled when dump_bins was requested
  int bins = 0;
  int frames = 0;  // nominal frame count of the configured duration
  std::uint64_t seed = 0;
};

struct RunOptions {
  int threads = 0;        // <= 0: runtime default
  bool dump_bins = false;
};

/// Executes the full sweep: for every r, build the scene with the first r
/// interferers active, compute every method's per-bin filter bank, process
/// the rendered signals, and collect one metrics row per (method, r).
/// Deterministic for a fixed config + seed.
SweepResult run_experiment(const config::ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes results.csv, results.json and run_meta.json (and bins.json when
/// dumps are present) into dir, each via write-then-rename.
void emit_results(const SweepResult& result, const config::ExperimentConfig& cfg,
                  const std::string& dir);

/// RFC-4180-style CSV serialization of the rows (header + one line per row).
std::string to_csv(const std::vector<SweepRow>& rows);

/// Parses the CSV emitted by to_csv (used by the round-trip tests).
std::vector<SweepRow> parse_csv(const std::string& text);

}  // namespace beamform::runner
