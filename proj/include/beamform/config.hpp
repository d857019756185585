// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beamform/engine.hpp"
#include "beamform/scene.hpp"
#include "beamform/stft.hpp"
#include "beamform/types.hpp"

namespace beamform::config {

struct SourceConfig {
  enum class Placement { kAngleDistance, kPosition, kIrFile };
  Placement placement = Placement::kAngleDistance;
  double angle_deg = 0.0;
  double distance_m = 0.8;
  scene::Vec3 position{0.0, 0.0, 0.0};
  std::string ir_wav;

  enum class Signal { kWhite, kSpeechShaped, kWavFile };
  Signal signal = Signal::kSpeechShaped;
  std::string signal_wav;
  double gain = 1.0;
  std::optional<double> psd_flat;           // explicit flat oracle PSD
  std::optional<std::vector<double>> psd;   // explicit per-bin oracle PSD

  scene::Vec3 resolved_position() const;
};

struct ExperimentConfig {
  double sample_rate = 16000.0;
  double speed_of_sound = 343.0;
  double duration_s = 10.0;
  double self_noise_sigma = 3.8e-5;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool emit_audio = false;

  std::vector<scene::Vec3> mic_positions;
  int ref_left = 0;
  int ref_right = -1;  // -1 means M-1

  stft::StftParams stft;
  SourceConfig target;
  std::vector<SourceConfig> interferers;
  std::vector<engine::MethodSpec> methods;
  std::vector<int> r_values;

  std::string base_dir;  // directory of the config file, for relative paths

  scene::ArrayGeometry geometry() const;
  void validate() const;
};

/// Parses and validates a JSON config file. Error messages carry the JSON
/// path of the offending field.
ExperimentConfig load_config(const std::string& path);

/// Parses a config from a JSON string (base_dir resolves relative paths).
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir);

}  // namespace beamform::config
