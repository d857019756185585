// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/config.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "beamform/errors.hpp"

namespace beamform::config {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config " + path + ": " + what);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

SourceConfig parse_source(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  SourceConfig s;
  const bool has_angle = j.contains("angle_deg");
  const bool has_pos = j.contains("position");
  const bool has_ir = j.contains("ir_wav");
  if (has_angle + has_pos + has_ir != 1)
    fail(path, "exactly one of angle_deg / position / ir_wav must be given");
  if (has_angle) {
    s.placement = SourceConfig::Placement::kAngleDistance;
    s.angle_deg = require_number(j.at("angle_deg"), path + ".angle_deg");
    s.distance_m = j.contains("distance_m")
                       ? require_number(j.at("distance_m"), path + ".distance_m")
                       : 0.8;
    if (s.distance_m <= 0.0) fail(path + ".distance_m", "must be positive");
  } else if (has_pos) {
    s.placement = SourceConfig::Placement::kPosition;
    const json& p = j.at("position");
    if (!p.is_array() || p.size() != 3) fail(path + ".position", "expected [x, y, z]");
    for (int i = 0; i < 3; ++i)
      s.position[static_cast<std::size_t>(i)] = require_number(p.at(i), path + ".position");
  } else {
    s.placement = SourceConfig::Placement::kIrFile;
    if (!j.at("ir_wav").is_string()) fail(path + ".ir_wav", "expected a string");
    s.ir_wav = j.at("ir_wav").get<std::string>();
  }
  if (j.contains("signal")) {
    const json& sig = j.at("signal");
    if (sig.is_string()) {
      const std::string v = sig.get<std::string>();
      if (v == "white")
        s.signal = SourceConfig::Signal::kWhite;
      else if (v == "speech_shaped")
        s.signal = SourceConfig::Signal::kSpeechShaped;
      else
        fail(path + ".signal", "expected \"white\", \"speech_shaped\" or {\"wav\": path}");
    } else if (sig.is_object() && sig.contains("wav") && sig.at("wav").is_string()) {
      s.signal = SourceConfig::Signal::kWavFile;
      s.signal_wav = sig.at("wav").get<std::string>();
    } else {
      fail(path + ".signal", "expected \"white\", \"speech_shaped\" or {\"wav\": path}");
    }
  }
  if (j.contains("gain")) {
    s.gain = require_number(j.at("gain"), path + ".gain");
    if (s.gain <= 0.0) fail(path + ".gain", "must be positive");
  }
  if (j.contains("psd")) {
    const json& p = j.at("psd");
    if (p.is_number()) {
      s.psd_flat = p.get<double>();
      if (*s.psd_flat < 0.0) fail(path + ".psd", "must be >= 0");
    } else if (p.is_array()) {
      std::vector<double> v;
      v.reserve(p.size());
      for (const json& e : p) {
        v.push_back(require_number(e, path + ".psd"));
        if (v.back() < 0.0) fail(path + ".psd", "entries must be >= 0");
      }
      s.psd = std::move(v);
    } else {
      fail(path + ".psd", "expected a number or an array");
    }
  }
  return s;
}

void parse_methods(const json& j, const std::string& path, std::vector<engine::MethodSpec>& out) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string mp = path + "[" + std::to_string(i) + "]";
    const json& mj = j.at(i);
    if (!mj.is_object() || !mj.contains("type") || !mj.at("type").is_string())
      fail(mp, "expected an object with a \"type\" string");
    const std::string type = mj.at("type").get<std::string>();
    engine::MethodSpec spec;
    if (type == "bmvdr") {
      spec.kind = engine::MethodKind::kBmvdr;
      out.push_back(spec);
    } else if (type == "oblcmv") {
      spec.kind = engine::MethodKind::kOblcmv;
      out.push_back(spec);
    } else if (type == "jblcmv") {
      spec.kind = engine::MethodKind::kJblcmv;
      out.push_back(spec);
    } else if (type == "blcmv") {
      spec.kind = engine::MethodKind::kBlcmv;
      if (mj.contains("eta")) {
        spec.eta_left = spec.eta_right = require_number(mj.at("eta"), mp + ".eta");
      }
      if (mj.contains("eta_left"))
        spec.eta_left = require_number(mj.at("eta_left"), mp + ".eta_left");
      if (mj.contains("eta_right"))
        spec.eta_right = require_number(mj.at("eta_right"), mp + ".eta_right");
      for (double eta : {spec.eta_left, spec.eta_right})
        if (eta < 0.0 || eta >= 1.0) fail(mp, "eta must lie in [0, 1)");
      out.push_back(spec);
    } else if (type == "relaxed") {
      std::vector<double> cs{0.5};
      std::vector<int> kmaxes{10};
      if (mj.contains("c")) {
        cs.clear();
        const json& cj = mj.at("c");
        if (cj.is_number()) {
          cs.push_back(cj.get<double>());
        } else if (cj.is_array()) {
          for (const json& e : cj) cs.push_back(require_number(e, mp + ".c"));
        } else {
          fail(mp + ".c", "expected a number or an array");
        }
      }
      if (mj.contains("k_max")) {
        kmaxes.clear();
        const json& kj = mj.at("k_max");
        if (kj.is_number_integer()) {
          kmaxes.push_back(kj.get<int>());
        } else if (kj.is_array()) {
          for (const json& e : kj) {
            if (!e.is_number_integer()) fail(mp + ".k_max", "expected integers");
            kmaxes.push_back(e.get<int>());
          }
        } else {
          fail(mp + ".k_max", "expected an integer or an array");
        }
      }
      for (double c : cs) {
        if (c < 0.0 || c > 1.0) fail(mp + ".c", "c must lie in [0, 1]");
        for (int km : kmaxes) {
          if (km < 1) fail(mp + ".k_max", "k_max must be >= 1");
          engine::MethodSpec r;
          r.kind = engine::MethodKind::kRelaxed;
          r.c = c;
          r.k_max = km;
          out.push_back(r);
        }
      }
    } else {
      fail(mp + ".type", "unknown method \"" + type + "\"");
    }
  }
}

}  // namespace

scene::Vec3 SourceConfig::resolved_position() const {
  if (placement == Placement::kPosition) return position;
  const double rad = angle_deg * kPi / 180.0;
  return {distance_m * std::cos(rad), distance_m * std::sin(rad), 0.0};
}

scene::ArrayGeometry ExperimentConfig::geometry() const {
  scene::ArrayGeometry g;
  g.mic_positions = mic_positions;
  g.refs.left = ref_left;
  g.refs.right = ref_right < 0 ? static_cast<int>(mic_positions.size()) - 1 : ref_right;
  g.sample_rate = sample_rate;
  g.speed_of_sound = speed_of_sound;
  return g;
}

void ExperimentConfig::validate() const {
  geometry().validate();
  stft::StftParams sp = stft;
  sp.sample_rate = sample_rate;
  sp.validate();
  if (duration_s <= 0.0) throw ConfigError("config duration_s: must be positive");
  if (self_noise_sigma <= 0.0) throw ConfigError("config self_noise_sigma: must be positive");
  if (static_cast<int>(duration_s * sample_rate) < stft.frame_length)
    throw ConfigError("config duration_s: too short for one STFT frame");
  if (methods.empty()) throw ConfigError("config methods: must not be empty");
  if (r_values.empty()) throw ConfigError("config sweep.r_values: must not be empty");
  for (int r : r_values) {
    if (r < 1) throw ConfigError("config sweep.r_values: entries must be >= 1");
    if (r > static_cast<int>(interferers.size()))
      throw ConfigError("config sweep.r_values: r = " + std::to_string(r) +
                        " exceeds declared interferer count " + std::to_string(interferers.size()));
  }
  auto check_file = [&](const std::string& rel, const std::string& what) {
    if (rel.empty()) return;
    const fs::path p = fs::path(base_dir) / rel;
    if (!fs::exists(p)) throw ConfigError("config " + what + ": file not found: " + p.string());
  };
  check_file(target.ir_wav, "target.ir_wav");
  check_file(target.signal_wav, "target.signal.wav");
  for (std::size_t i = 0; i < interferers.size(); ++i) {
    check_file(interferers[i].ir_wav, "interferers[" + std::to_string(i) + "].ir_wav");
    check_file(interferers[i].signal_wav, "interferers[" + std::to_string(i) + "].signal.wav");
  }
  const int bins = stft.fft_size / 2 + 1;
  auto check_psd = [&](const SourceConfig& s, const std::string& what) {
    if (s.psd && static_cast<int>(s.psd->size()) != bins)
      throw ConfigError("config " + what + ".psd: expected " + std::to_string(bins) + " bins");
  };
  check_psd(target, "target");
  for (std::size_t i = 0; i < interferers.size(); ++i)
    check_psd(interferers[i], "interferers[" + std::to_string(i) + "]");
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  if (j.contains("sample_rate")) cfg.sample_rate = require_number(j.at("sample_rate"), "sample_rate");
  if (j.contains("speed_of_sound"))
    cfg.speed_of_sound = require_number(j.at("speed_of_sound"), "speed_of_sound");
  if (j.contains("duration_s")) cfg.duration_s = require_number(j.at("duration_s"), "duration_s");
  if (j.contains("self_noise_sigma"))
    cfg.self_noise_sigma = require_number(j.at("self_noise_sigma"), "self_noise_sigma");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      fail("seed", "expected an unsigned integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) fail("output_dir", "expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("emit_audio")) {
    if (!j.at("emit_audio").is_boolean()) fail("emit_audio", "expected a boolean");
    cfg.emit_audio = j.at("emit_audio").get<bool>();
  }

  if (!j.contains("geometry") || !j.at("geometry").is_object())
    fail("geometry", "required object missing");
  const json& gj = j.at("geometry");
  if (!gj.contains("mic_positions") || !gj.at("mic_positions").is_array())
    fail("geometry.mic_positions", "required array missing");
  for (const json& p : gj.at("mic_positions")) {
    if (!p.is_array() || p.size() != 3) fail("geometry.mic_positions", "expected [x, y, z] triples");
    scene::Vec3 v;
    for (int i = 0; i < 3; ++i)
      v[static_cast<std::size_t>(i)] = require_number(p.at(i), "geometry.mic_positions");
    cfg.mic_positions.push_back(v);
  }
  if (gj.contains("ref_left")) cfg.ref_left = gj.at("ref_left").get<int>();
  if (gj.contains("ref_right")) cfg.ref_right = gj.at("ref_right").get<int>();

  if (j.contains("stft")) {
    const json& sj = j.at("stft");
    if (!sj.is_object()) fail("stft", "expected an object");
    if (sj.contains("frame_length")) cfg.stft.frame_length = sj.at("frame_length").get<int>();
    if (sj.contains("hop")) cfg.stft.hop = sj.at("hop").get<int>();
    if (sj.contains("fft_size")) cfg.stft.fft_size = sj.at("fft_size").get<int>();
  }
  cfg.stft.sample_rate = cfg.sample_rate;

  if (!j.contains("target")) fail("target", "required object missing");
  cfg.target = parse_source(j.at("target"), "target");
  cfg.target.signal = j.at("target").contains("signal") ? cfg.target.signal
                                                        : SourceConfig::Signal::kWhite;
  if (!j.contains("interferers") || !j.at("interferers").is_array())
    fail("interferers", "required array missing");
  for (std::size_t i = 0; i < j.at("interferers").size(); ++i)
    cfg.interferers.push_back(
        parse_source(j.at("interferers").at(i), "interferers[" + std::to_string(i) + "]"));

  if (!j.contains("methods")) fail("methods", "required array missing");
  parse_methods(j.at("methods"), "methods", cfg.methods);

  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    if (!sw.is_object() || !sw.contains("r_values") || !sw.at("r_values").is_array())
      fail("sweep.r_values", "required array missing");
    for (const json& e : sw.at("r_values")) {
      if (!e.is_number_integer()) fail("sweep.r_values", "expected integers");
      cfg.r_values.push_back(e.get<int>());
    }
  } else {
    for (int r = 1; r <= static_cast<int>(cfg.interferers.size()); ++r) cfg.r_values.push_back(r);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, fs::path(path).parent_path().string());
}

}  // namespace beamform::config
