// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>
#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/types.hpp"

namespace beamform::metrics {

/// Binaural-cue snapshot of one interferer at one (bin, frame).
struct CueRecord {
  int interferer = 0;
  int bin = 0;
  int frame = 0;
  cplx itf_in{0.0, 0.0};
  cplx itf_out{0.0, 0.0};
  double ild_in = 0.0, ild_out = 0.0;   // |ITF|^2
  double ipd_in = 0.0, ipd_out = 0.0;   // principal-value phase
  double itf_error = 0.0;               // E
  double ild_error = 0.0;               // L
  double ipd_error = 0.0;               // T in [0, 1]
  bool valid = true;                    // false when a denominator was degenerate
};

/// Wraps an angle to (-pi, pi].
double wrap_phase(double x);

/// Cues of interferer b through `filter`; pass the selection-vector filter
/// (lcmv::passthrough_filter) for the unprocessed input cues. Degenerate
/// denominators mark the record invalid instead of throwing.
CueRecord binaural_cues(const lcmv::BinauralFilter& filter, const CVec& b, RefPair refs);

struct CueErrors {
  double itf = 0.0;
  double ild = 0.0;
  double ipd = 0.0;  // |wrapped IPD difference| / pi
};

/// (E, L, T) of a populated record. IPD differences are wrapped to (-pi, pi]
/// before Eq-style normalization so T <= 1 always holds.
CueErrors cue_errors(const CueRecord& record);

/// Frequency bands for the level/phase aggregates: ILD over [ild_low_hz, fs/2],
/// IPD over (0, ipd_high_hz], DC excluded.
struct BandEdges {
  int k_ild = 0;       // first bin of the ILD band
  int k_ipd = 0;       // last bin of the IPD band
  int bins = 0;        // one-sided bin count N

  static BandEdges from_rates(double sample_rate, int fft_size, double ild_low_hz = 3000.0,
                              double ipd_high_hz = 1000.0);
};

struct TotalErrors {
  double ild = 0.0;
  double ipd = 0.0;
  double itf = 0.0;
  int excluded_records = 0;  // invalid records skipped
};

/// Triple-nested aggregation: per interferer, frame-mean per bin, band
/// restricted bin-mean, summed over interferers. Records must cover
/// interferers 0..r-1; missing (bin, frame) cells simply do not contribute.
TotalErrors total_errors(const std::vector<CueRecord>& records, const BandEdges& bands,
                         int interferer_count);

struct AverageRatio {
  double value = 0.0;
  int excluded = 0;  // entries whose BMVDR error sat below the zero guard
};

inline constexpr double kRatioZeroGuard = 1e-12;

/// Mean over (interferer, bin, frame) of E_proposed / E_bmvdr. The two lists
/// must be index-aligned. Entries with E_bmvdr below the guard are excluded;
/// throws UndefinedRatioError when nothing remains.
AverageRatio average_itf_error_ratio(const std::vector<CueRecord>& proposed,
                                     const std::vector<CueRecord>& bmvdr, int interferer_count);

/// Frame-constant per-bin CPSDs with optional per-frame power scales; this is
/// the long-term-oracle protocol (scales default to 1).
struct CpsdSequence {
  std::vector<CMat> target;  // per-bin P_x
  std::vector<CMat> noise;   // per-bin P
  int frames = 1;
  RVec target_frame_scale;   // optional, size == frames
  RVec noise_frame_scale;    // optional, size == frames
};

struct GsSnr {
  double in_db = 0.0;
  double out_db = 0.0;
  double gain_db = 0.0;
  int skipped_frames = 0;
};

inline constexpr double kSnrClampLoDb = -20.0;
inline constexpr double kSnrClampHiDb = 50.0;

/// Global segmental SNR: per-frame bin-summed SNR through Eq-style selection
/// (input) and filter (output) quadratic forms, clamped to [-20, 50] dB and
/// frame averaged. Pass an empty filter bank for pass-through output.
GsSnr gs_snr(const CpsdSequence& cpsds, const std::vector<lcmv::BinauralFilter>& filters,
             RefPair refs);

}  // namespace beamform::metrics
