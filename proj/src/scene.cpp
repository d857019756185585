// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/scene.hpp"

#include <cmath>

#include "beamform/errors.hpp"
#include "beamform/fft.hpp"
#include "beamform/log.hpp"

namespace beamform::scene {
namespace {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Half-width of the windowed-sinc interpolator used for fractional delays.
constexpr int kSincHalfWidth = 48;

double windowed_sinc(double x) {
  if (std::abs(x) >= kSincHalfWidth) return 0.0;
  const double hann = 0.5 * (1.0 + std::cos(kPi * x / kSincHalfWidth));
  if (std::abs(x) < 1e-12) return hann;
  return hann * std::sin(kPi * x) / (kPi * x);
}

}  // namespace

void ArrayGeometry::validate() const {
  const int m = mics();
  if (m < 2 || m % 2 != 0)
    throw ConfigError("geometry: microphone count must be even and >= 2, got " + std::to_string(m));
  if (refs.left == refs.right)
    throw ConfigError("geometry: reference channels must differ");
  if (refs.left < 0 || refs.left >= m || refs.right < 0 || refs.right >= m)
    throw ConfigError("geometry: reference channel index out of range");
  if (sample_rate <= 0.0) throw ConfigError("geometry: sample_rate must be positive");
  if (speed_of_sound <= 0.0) throw ConfigError("geometry: speed_of_sound must be positive");
}

void SourceDescriptor::validate() const {
  if (position.has_value() == impulse_responses.has_value())
    throw ConfigError("source: exactly one of position / impulse_responses must be set");
  if ((psd.array() < 0.0).any()) throw ConfigError("source: psd entries must be >= 0");
}

bool reference_entries_usable(const CVec& atf, RefPair refs) {
  const double max_mag = atf.cwiseAbs().maxCoeff();
  const double floor = kRefMagnitudeGuard * max_mag;
  return std::abs(atf[refs.left]) >= floor && std::abs(atf[refs.right]) >= floor &&
         std::abs(atf[refs.left]) > 0.0 && std::abs(atf[refs.right]) > 0.0;
}

std::vector<CVec> synthesize_freefield_atfs(const ArrayGeometry& geometry, const Vec3& position,
                                            int fft_size) {
  geometry.validate();
  if (fft_size < 2) throw InvalidInputError("freefield atfs: fft_size must be >= 2");
  const int m = geometry.mics();
  std::vector<double> dist(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    dist[static_cast<std::size_t>(j)] = distance(position, geometry.mic_positions[static_cast<std::size_t>(j)]);
    if (dist[static_cast<std::size_t>(j)] <= 1e-9)
      throw DegenerateGeometryError("freefield atfs: source coincides with microphone " + std::to_string(j));
  }
  const int bins = fft_size / 2 + 1;
  std::vector<CVec> atfs(static_cast<std::size_t>(bins), CVec(m));
  for (int k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * geometry.sample_rate / static_cast<double>(fft_size);
    for (int j = 0; j < m; ++j) {
      const double d = dist[static_cast<std::size_t>(j)];
      const double gain = 1.0 / (4.0 * kPi * d);
      const double phase = -2.0 * kPi * f * d / geometry.speed_of_sound;
      atfs[static_cast<std::size_t>(k)][j] = std::polar(gain, phase);
    }
  }
  return atfs;
}

std::vector<CVec> atfs_from_impulse_responses(const RMat& irs, int fft_size) {
  if (irs.rows() == 0 || irs.cols() == 0)
    throw InvalidInputError("atfs from irs: empty impulse-response matrix");
  if (fft_size < 2 || !fft::is_pow2(static_cast<std::size_t>(fft_size)))
    throw InvalidInputError("atfs from irs: fft_size must be a power of two >= 2");
  const int m = static_cast<int>(irs.cols());
  RMat used = irs;
  if (irs.rows() > fft_size) {
    log::warn("atfs from irs: impulse responses of length " + std::to_string(irs.rows()) +
              " truncated to fft_size " + std::to_string(fft_size));
    used = irs.topRows(fft_size);
  }
  const int bins = fft_size / 2 + 1;
  std::vector<CVec> atfs(static_cast<std::size_t>(bins), CVec(m));
  for (int j = 0; j < m; ++j) {
    const CVec spec = fft::rfft(used.col(j), fft_size);
    for (int k = 0; k < bins; ++k) atfs[static_cast<std::size_t>(k)][j] = spec[k];
  }
  return atfs;
}

NoiseCpsd build_noise_cpsd(const std::vector<CVec>& interferer_atfs, const RVec& interferer_psds,
                           double self_noise_power, int mics) {
  if (static_cast<int>(interferer_atfs.size()) != interferer_psds.size())
    throw InvalidInputError("noise cpsd: atf/psd list length mismatch");
  if (self_noise_power <= 0.0)
    throw InvalidNoiseFloorError("noise cpsd: self-noise power must be > 0 (matrix would be singular)");
  int m = mics;
  if (!interferer_atfs.empty()) m = static_cast<int>(interferer_atfs.front().size());
  for (const CVec& b : interferer_atfs)
    if (b.size() != m) throw InvalidInputError("noise cpsd: interferer ATF length mismatch");
  if (m <= 0)
    throw InvalidInputError("noise cpsd: channel count required when the interferer list is empty");

  NoiseCpsd out;
  out.self_noise_power = self_noise_power;
  out.interferer_psds = interferer_psds;
  out.p = CMat::Zero(m, m);
  for (std::size_t i = 0; i < interferer_atfs.size(); ++i)
    out.p.noalias() += interferer_psds[static_cast<int>(i)] * interferer_atfs[i] *
                       interferer_atfs[i].adjoint();
  out.p += self_noise_power * CMat::Identity(m, m);
  // enforce exact Hermitian symmetry against accumulation round-off
  out.p = 0.5 * (out.p + out.p.adjoint()).eval();
  return out;
}

RMat freefield_impulse_responses(const ArrayGeometry& geometry, const Vec3& position) {
  geometry.validate();
  const int m = geometry.mics();
  double max_delay = 0.0;
  std::vector<double> delays(static_cast<std::size_t>(m));
  std::vector<double> gains(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double d = distance(position, geometry.mic_positions[static_cast<std::size_t>(j)]);
    if (d <= 1e-9)
      throw DegenerateGeometryError("freefield irs: source coincides with microphone " + std::to_string(j));
    delays[static_cast<std::size_t>(j)] = d / geometry.speed_of_sound * geometry.sample_rate;
    gains[static_cast<std::size_t>(j)] = 1.0 / (4.0 * kPi * d);
    max_delay = std::max(max_delay, delays[static_cast<std::size_t>(j)]);
  }
  const int taps = static_cast<int>(std::ceil(max_delay)) + 2 * kSincHalfWidth + 1;
  RMat irs = RMat::Zero(taps, m);
  for (int j = 0; j < m; ++j)
    for (int n = 0; n < taps; ++n)
      irs(n, j) = gains[static_cast<std::size_t>(j)] *
                  windowed_sinc(static_cast<double>(n) - kSincHalfWidth - delays[static_cast<std::size_t>(j)]);
  // The interpolator introduces a common kSincHalfWidth-sample latency on all
  // channels; inter-channel delays (the quantity the model cares about) are
  // preserved exactly.
  return irs;
}

double GaussianRng::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms in (0, 1]
  const double inv = 1.0 / 18446744073709551616.0;  // 2^-64
  double u1 = (static_cast<double>(engine_()) + 1.0) * inv;
  double u2 = (static_cast<double>(engine_()) + 1.0) * inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

RMat render_microphone_signals(const ArrayGeometry& geometry,
                               const std::vector<SourceDescriptor>& sources,
                               const std::vector<RVec>& source_waveforms,
                               const RenderOptions& options) {
  geometry.validate();
  if (sources.size() != source_waveforms.size())
    throw InvalidInputError("render: source/waveform count mismatch");
  if (sources.empty()) throw InvalidInputError("render: no sources");
  const Eigen::Index n = source_waveforms.front().size();
  for (const RVec& w : source_waveforms)
    if (w.size() != n) throw InvalidInputError("render: source waveforms must have equal length");

  const int m = geometry.mics();
  Eigen::Index out_len = n;
  std::vector<RMat> irs(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    sources[s].validate();
    irs[s] = sources[s].position.has_value()
                 ? freefield_impulse_responses(geometry, *sources[s].position)
                 : *sources[s].impulse_responses;
    if (irs[s].cols() != m) throw InvalidInputError("render: impulse responses must have M channels");
    out_len = std::max(out_len, n + irs[s].rows() - 1);
  }

  RMat out = RMat::Zero(out_len, m);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const RVec& x = source_waveforms[s];
    const RMat& h = irs[s];
    for (int j = 0; j < m; ++j)
      for (Eigen::Index t = 0; t < h.rows(); ++t) {
        const double hv = h(t, j);
        if (hv == 0.0) continue;
        out.col(j).segment(t, n) += hv * x;
      }
  }
  if (options.self_noise_sigma > 0.0) {
    GaussianRng rng(options.seed);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (int j = 0; j < m; ++j) out(i, j) += options.self_noise_sigma * rng();
  }
  return out;
}

}  // namespace beamform::scene
