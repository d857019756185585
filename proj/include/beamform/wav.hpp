// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "beamform/types.hpp"

namespace beamform::wav {

/// Multichannel waveform: one column per channel, samples in [-1, 1] for
/// integer PCM sources. Channel order maps to microphone index order.
struct Waveform {
  RMat samples;  // frames x channels
  int sample_rate = 0;

  int frames() const { return static_cast<int>(samples.rows()); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

/// Reads a RIFF/WAVE file. Supports 16-bit integer PCM and 32-bit float PCM,
/// mono or multichannel.
Waveform read(const std::string& path);

/// Writes a RIFF/WAVE file; format is "float32" or "pcm16".
void write(const std::string& path, const Waveform& wav, const std::string& format = "float32");

}  // namespace beamform::wav
