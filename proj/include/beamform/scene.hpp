// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "beamform/types.hpp"

namespace beamform::scene {

using Vec3 = std::array<double, 3>;

/// Microphone-array description. M must be even and >= 2; the two reference
/// channels are the per-device front microphones.
struct ArrayGeometry {
  std::vector<Vec3> mic_positions;
  RefPair refs;
  double sample_rate = 16000.0;
  double speed_of_sound = 343.0;

  int mics() const { return static_cast<int>(mic_positions.size()); }

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

enum class SourceKind { kTarget, kInterferer };

/// One sound source: either a free-field point position or measured
/// per-microphone impulse responses, plus an optional oracle PSD.
struct SourceDescriptor {
  SourceKind kind = SourceKind::kInterferer;
  std::optional<Vec3> position;                // free-field mode
  std::optional<RMat> impulse_responses;       // measured mode, samples x M
  RVec psd;                                    // per-bin, linear power; may be empty

  void validate() const;
};

/// Per-bin acoustic transfer functions for one scene: target vector a and
/// interferer vectors b_i. Bin count is fft_size/2 + 1 (one-sided spectrum).
struct AtfSet {
  std::vector<CVec> target;                // [bin] -> length-M vector a
  std::vector<std::vector<CVec>> interferers;  // [i][bin] -> length-M vector b_i
  int fft_size = 0;

  int bins() const { return static_cast<int>(target.size()); }
};

/// Disturbance cross power spectral density at one bin:
/// P = sum_i p_i b_i b_i^H + sigma^2 I.
struct NoiseCpsd {
  CMat p;                      // M x M, Hermitian positive definite
  double self_noise_power = 0.0;
  RVec interferer_psds;        // the p_i that built this matrix
};

/// Relative-magnitude guard for reference-channel ATF entries. Entries whose
/// magnitude falls below kRefMagnitudeGuard times the largest channel
/// magnitude at that bin are treated as degenerate (divisions by them are
/// not safe).
inline constexpr double kRefMagnitudeGuard = 1e-12;

bool reference_entries_usable(const CVec& atf, RefPair refs);

/// Free-field ATF: spherical spreading 1/(4 pi d) with pure propagation
/// delay d / c. Returns one length-M vector per one-sided bin.
std::vector<CVec> synthesize_freefield_atfs(const ArrayGeometry& geometry, const Vec3& position,
                                            int fft_size);

/// One-sided DFT of each impulse response, zero padded to fft_size. IRs
/// longer than fft_size are truncated with a warning.
std::vector<CVec> atfs_from_impulse_responses(const RMat& irs, int fft_size);

/// P = sum_i p_i b_i b_i^H + sigma^2 I for one bin. `mics` is only consulted
/// when the interferer list is empty (r = 0 gives P = sigma^2 I).
NoiseCpsd build_noise_cpsd(const std::vector<CVec>& interferer_atfs, const RVec& interferer_psds,
                           double self_noise_power, int mics = 0);

/// Fractional-delay FIR (windowed sinc) realizing the free-field path from
/// `position` to every microphone; samples x M, used by the renderer and by
/// IR-mode consumers that want the analytic scene as measured data.
RMat freefield_impulse_responses(const ArrayGeometry& geometry, const Vec3& position);

struct RenderOptions {
  double self_noise_sigma = 0.0;  // standard deviation; 0 disables noise
  std::uint64_t seed = 0;
};

/// Convolves each source's impulse responses with its waveform and sums,
/// adding seeded white Gaussian self noise. Free-field sources are first
/// turned into fractional-delay FIRs. All waveforms must have equal length.
RMat render_microphone_signals(const ArrayGeometry& geometry,
                               const std::vector<SourceDescriptor>& sources,
                               const std::vector<RVec>& source_waveforms,
                               const RenderOptions& options);

/// Deterministic standard-normal generator (Box-Muller over mt19937_64),
/// used everywhere a noise realization must be bit-reproducible from a seed.
/// std::normal_distribution is avoided because its sequence is
/// implementation defined.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}
  double operator()();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace beamform::scene
