// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/stft.hpp"

#include <cmath>

#include "beamform/errors.hpp"
#include "beamform/fft.hpp"

namespace beamform::stft {

RVec StftParams::window() const {
  RVec w(frame_length);
  for (int n = 0; n < frame_length; ++n)
    w[n] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * n / static_cast<double>(frame_length)));
  return w;
}

void StftParams::validate() const {
  if (frame_length < 2 || frame_length % 2 != 0)
    throw ConfigError("stft: frame_length must be even and >= 2");
  if (hop != frame_length / 2)
    throw ConfigError("stft: hop must equal frame_length/2 (50% overlap keeps COLA)");
  if (fft_size < frame_length) throw ConfigError("stft: fft_size must be >= frame_length");
  if (!fft::is_pow2(static_cast<std::size_t>(fft_size)))
    throw ConfigError("stft: fft_size must be a power of two");
  if (sample_rate <= 0.0) throw ConfigError("stft: sample_rate must be positive");
  // numerical COLA check on an interior point set
  const RVec w = window();
  for (int n = 0; n < hop; ++n) {
    const double s = w[n] * w[n] + w[n + hop] * w[n + hop];
    if (std::abs(s - 1.0) > 1e-12)
      throw ConfigError("stft: window violates constant overlap-add");
  }
}

TfTensor::TfTensor(int frames, int bins, int channels, StftParams params)
    : data_(static_cast<std::size_t>(frames) * static_cast<std::size_t>(bins) *
                static_cast<std::size_t>(channels),
            cplx(0.0, 0.0)),
      frames_(frames),
      bins_(bins),
      channels_(channels),
      params_(std::move(params)) {}

double TfTensor::total_energy() const {
  double e = 0.0;
  for (const cplx& v : data_) e += std::norm(v);
  return e;
}

TfTensor analyze(const RMat& waveform, const StftParams& params) {
  params.validate();
  const int n = static_cast<int>(waveform.rows());
  const int channels = static_cast<int>(waveform.cols());
  if (n < params.frame_length)
    throw InvalidInputError("stft analyze: waveform shorter than one frame");
  const int frames = 1 + (n - params.frame_length) / params.hop;
  const RVec win = params.window();

  TfTensor out(frames, params.bins(), channels, params);
  RVec buf(params.frame_length);
  for (int j = 0; j < channels; ++j) {
    for (int l = 0; l < frames; ++l) {
      const int start = l * params.hop;
      buf = waveform.col(j).segment(start, params.frame_length).cwiseProduct(win);
      const CVec spec = fft::rfft(buf, params.fft_size);
      for (int k = 0; k < params.bins(); ++k) out.at(l, k, j) = spec[k];
    }
  }
  return out;
}

RMat synthesize(const TfTensor& tensor) {
  const StftParams& params = tensor.params();
  params.validate();
  const int frames = tensor.frames();
  const int channels = tensor.channels();
  const int out_len = (frames - 1) * params.hop + params.frame_length;
  const RVec win = params.window();

  RMat out = RMat::Zero(out_len, channels);
  CVec spec(params.bins());
  for (int j = 0; j < channels; ++j) {
    for (int l = 0; l < frames; ++l) {
      for (int k = 0; k < params.bins(); ++k) spec[k] = tensor.at(l, k, j);
      const RVec frame = fft::irfft(spec, params.fft_size);
      const int start = l * params.hop;
      for (int nn = 0; nn < params.frame_length; ++nn)
        out(start + nn, j) += frame[nn] * win[nn];
    }
  }
  return out;
}

TfTensor apply_binaural_filter(const TfTensor& tensor, const FilterProvider& provider) {
  const int frames = tensor.frames();
  const int bins = tensor.bins();
  const int m = tensor.channels();
  TfTensor out(frames, bins, 2, tensor.params());
  for (int l = 0; l < frames; ++l) {
    for (int k = 0; k < bins; ++k) {
      const lcmv::BinauralFilter* f = provider(k, l);
      if (f == nullptr)
        throw ConfigError("apply filter: no filter for bin " + std::to_string(k));
      if (f->mics() != m)
        throw ConfigError("apply filter: filter channel count mismatch at bin " + std::to_string(k));
      const auto y = tensor.channel_slice(l, k);
      out.at(l, k, 0) = f->left().dot(y);   // Eigen dot conjugates the left factor
      out.at(l, k, 1) = f->right().dot(y);
    }
  }
  return out;
}

TfTensor apply_binaural_filter(const TfTensor& tensor,
                               const std::vector<lcmv::BinauralFilter>& bank) {
  if (static_cast<int>(bank.size()) != tensor.bins())
    throw ConfigError("apply filter: bank must hold one filter per bin");
  return apply_binaural_filter(
      tensor, [&bank](int bin, int) { return &bank[static_cast<std::size_t>(bin)]; });
}

}  // namespace beamform::stft
