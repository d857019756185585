// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/metrics.hpp"
#include "beamform/relaxed.hpp"
#include "beamform/scene.hpp"
#include "beamform/stft.hpp"
#include "beamform/types.hpp"

namespace beamform::engine {

/// Everything a per-bin solver needs, fully immutable once built.
struct SceneSpectra {
  scene::ArrayGeometry geometry;
  stft::StftParams stft;
  std::vector<CVec> target_atf;                    // per bin
  std::vector<std::vector<CVec>> interferer_atfs;  // [interferer][bin]
  RVec target_psd;                                 // per bin
  RMat interferer_psds;                            // bins x r
  double self_noise_power = 0.0;
  std::vector<CMat> noise_cpsd;   // per bin, P
  std::vector<CMat> target_cpsd;  // per bin, P_x

  int bins() const { return static_cast<int>(target_atf.size()); }
  int interferers() const { return static_cast<int>(interferer_atfs.size()); }
};

enum class MethodKind { kBmvdr, kBlcmv, kOblcmv, kJblcmv, kRelaxed };

struct MethodSpec {
  MethodKind kind = MethodKind::kBmvdr;
  double eta_left = 0.2;   // blcmv
  double eta_right = 0.2;  // blcmv
  double c = 0.5;          // relaxed
  int k_max = 10;          // relaxed

  std::string label() const;
};

struct FilterBank {
  std::vector<lcmv::BinauralFilter> filters;  // one per bin
  std::vector<int> iterations;                // per bin, relaxed only (else 0)
  std::map<int, int> iteration_histogram;     // iterations -> bin count
  int fallback_bins = 0;
  int exhausted_bins = 0;
  int degenerate_bins = 0;      // bins where flagged ATFs changed the constraint set
  int dropped_constraints = 0;  // interferer constraints dropped by the magnitude guard
  double mean_iterations = 0.0;
};

/// Serial reference implementation: plain per-bin loop.
FilterBank compute_filter_bank_serial(const SceneSpectra& spectra, const MethodSpec& method);

/// OpenMP kernel; bins are independent, so the result is bit-identical to the
/// serial reference for every thread count. threads <= 0 uses the runtime
/// default.
FilterBank compute_filter_bank(const SceneSpectra& spectra, const MethodSpec& method,
                               int threads);

/// Unit-RMS speech-shaped noise: seeded white Gaussian noise through the
/// documented one-pole low-pass (pole 0.8, about 500 Hz at 16 kHz).
RVec speech_shaped_noise(int samples, std::uint64_t seed);

/// Unit-RMS white Gaussian noise.
RVec white_noise(int samples, std::uint64_t seed);

/// Long-term periodogram average over STFT frames: mean_l |X(k, l)|^2.
RVec estimate_psd(const RVec& waveform, const stft::StftParams& params);

/// Per-bin cue records (frame 0) of a filter bank against every interferer.
std::vector<metrics::CueRecord> cue_records(const SceneSpectra& spectra,
                                            const std::vector<lcmv::BinauralFilter>& bank);

}  // namespace beamform::engine
