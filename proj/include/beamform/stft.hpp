// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/types.hpp"

namespace beamform::stft {

/// Analysis/synthesis parameters. The square-root-Hann window at 50% overlap
/// satisfies constant overlap-add, so an unmodified analyze/synthesize round
/// trip reconstructs the interior of the signal exactly.
struct StftParams {
  int frame_length = 160;
  int hop = 80;
  int fft_size = 256;
  double sample_rate = 16000.0;

  int bins() const { return fft_size / 2 + 1; }

  /// Square-root of the periodic Hann window, length frame_length.
  RVec window() const;

  /// Throws ConfigError unless hop = frame_length/2, fft_size is a power of
  /// two >= frame_length, and the window satisfies COLA to 1e-12.
  void validate() const;
};

/// Time-frequency tensor, frames x bins x channels, bins one-sided.
class TfTensor {
 public:
  TfTensor() = default;
  TfTensor(int frames, int bins, int channels, StftParams params);

  int frames() const { return frames_; }
  int bins() const { return bins_; }
  int channels() const { return channels_; }
  const StftParams& params() const { return params_; }

  cplx& at(int frame, int bin, int channel) {
    return data_[index(frame, bin, channel)];
  }
  const cplx& at(int frame, int bin, int channel) const {
    return data_[index(frame, bin, channel)];
  }

  /// Contiguous channel vector at (frame, bin).
  Eigen::Map<const CVec> channel_slice(int frame, int bin) const {
    return {data_.data() + index(frame, bin, 0), channels_};
  }

  double total_energy() const;

 private:
  std::size_t index(int frame, int bin, int channel) const {
    return (static_cast<std::size_t>(frame) * static_cast<std::size_t>(bins_) +
            static_cast<std::size_t>(bin)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }
  std::vector<cplx> data_;
  int frames_ = 0, bins_ = 0, channels_ = 0;
  StftParams params_;
};

/// Windowed one-sided DFT per frame and channel. waveform is samples x
/// channels and must provide at least one full frame.
TfTensor analyze(const RMat& waveform, const StftParams& params);

/// Inverse DFT per frame, synthesis windowing, overlap-add. Output length is
/// (frames-1)*hop + frame_length.
RMat synthesize(const TfTensor& tensor);

/// Per-bin filter provider; may vary with the frame. Returning nullptr for
/// any (bin, frame) is a configuration error.
using FilterProvider = std::function<const lcmv::BinauralFilter*(int bin, int frame)>;

/// Applies w_L^H y and w_R^H y at every (bin, frame): returns a two-channel
/// tensor (channel 0 = left, 1 = right).
TfTensor apply_binaural_filter(const TfTensor& tensor, const FilterProvider& provider);

/// Convenience overload for per-bin, frame-constant filter banks.
TfTensor apply_binaural_filter(const TfTensor& tensor,
                               const std::vector<lcmv::BinauralFilter>& bank);

}  // namespace beamform::stft
