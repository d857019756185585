// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "beamform/errors.hpp"
#include "beamform/log.hpp"
#include "beamform/version.hpp"
#include "beamform/wav.hpp"

namespace beamform::runner {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

RVec load_signal(const config::SourceConfig& src, int samples, double sample_rate,
                 std::uint64_t seed, const std::string& base_dir, std::string* kind_out) {
  RVec x;
  switch (src.signal) {
    case config::SourceConfig::Signal::kWhite:
      *kind_out = "white";
      x = engine::white_noise(samples, seed);
      break;
    case config::SourceConfig::Signal::kSpeechShaped:
      *kind_out = "speech_shaped";
      x = engine::speech_shaped_noise(samples, seed);
      break;
    case config::SourceConfig::Signal::kWavFile: {
      *kind_out = "wav:" + src.signal_wav;
      const wav::Waveform w = wav::read((fs::path(base_dir) / src.signal_wav).string());
      if (static_cast<double>(w.sample_rate) != sample_rate)
        throw ConfigError("signal wav " + src.signal_wav + ": sample rate " +
                          std::to_string(w.sample_rate) + " does not match config");
      if (w.frames() == 0) throw ConfigError("signal wav " + src.signal_wav + ": empty file");
      x = RVec(samples);
      for (int i = 0; i < samples; ++i) x[i] = w.samples(i % w.frames(), 0);  // tile if short
      const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(samples));
      if (rms > 0.0) x /= rms;
      break;
    }
  }
  return src.gain * x;
}

std::vector<CVec> source_atfs(const config::SourceConfig& src, const scene::ArrayGeometry& geom,
                              int fft_size, const std::string& base_dir) {
  if (src.placement == config::SourceConfig::Placement::kIrFile) {
    const wav::Waveform w = wav::read((fs::path(base_dir) / src.ir_wav).string());
    if (w.channels() != geom.mics())
      throw ConfigError("ir wav " + src.ir_wav + ": expected " + std::to_string(geom.mics()) +
                        " channels, got " + std::to_string(w.channels()));
    return scene::atfs_from_impulse_responses(w.samples, fft_size);
  }
  return scene::synthesize_freefield_atfs(geom, src.resolved_position(), fft_size);
}

RMat source_irs(const config::SourceConfig& src, const scene::ArrayGeometry& geom,
                const std::string& base_dir) {
  if (src.placement == config::SourceConfig::Placement::kIrFile) {
    const wav::Waveform w = wav::read((fs::path(base_dir) / src.ir_wav).string());
    return w.samples;
  }
  return scene::freefield_impulse_responses(geom, src.resolved_position());
}

void write_atomic(const std::string& dir, const std::string& name, const std::string& content) {
  const fs::path target = fs::path(dir) / name;
  const fs::path tmp = fs::path(dir) / (".tmp." + name);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("emit: cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("emit: short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

json row_to_json(const SweepRow& row) {
  json h = json::object();
  for (const auto& [iters, count] : row.iteration_histogram) h[std::to_string(iters)] = count;
  return json{{"method", row.method},
              {"r", row.r},
              {"c", std::isnan(row.c) ? json() : json(row.c)},
              {"k_max", row.k_max},
              {"gs_snr_in_db", row.gs_snr_in_db},
              {"gs_snr_out_db", row.gs_snr_out_db},
              {"gs_snr_gain_db", row.gs_snr_gain_db},
              {"tot_er_itf", row.tot_er_itf},
              {"tot_er_ild", row.tot_er_ild},
              {"tot_er_ipd", row.tot_er_ipd},
              {"av_er_itf", row.av_er_itf},
              {"mean_iterations", row.mean_iterations},
              {"fallback_bins", row.fallback_bins},
              {"exhausted_bins", row.exhausted_bins},
              {"degenerate_bins", row.degenerate_bins},
              {"ratio_excluded", row.ratio_excluded},
              {"out_rms_left", row.out_rms_left},
              {"out_rms_right", row.out_rms_right},
              {"seed", row.seed},
              {"iteration_histogram", h}};
}

}  // namespace

SweepResult run_experiment(const config::ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const scene::ArrayGeometry geom = cfg.geometry();
  stft::StftParams sp = cfg.stft;
  sp.sample_rate = cfg.sample_rate;
  const int bins = sp.bins();
  const int samples = static_cast<int>(std::llround(cfg.duration_s * cfg.sample_rate));
  const double sigma2 = cfg.self_noise_sigma * cfg.self_noise_sigma;

  SweepResult result;
  result.bins = bins;
  result.seed = cfg.seed;

  // source signals and oracle PSDs (declaration order fixes the seeds)
  std::string target_kind;
  const RVec target_wave =
      load_signal(cfg.target, samples, cfg.sample_rate, cfg.seed, cfg.base_dir, &target_kind);
  std::vector<RVec> interferer_waves;
  for (std::size_t i = 0; i < cfg.interferers.size(); ++i) {
    std::string kind;
    interferer_waves.push_back(load_signal(cfg.interferers[i], samples, cfg.sample_rate,
                                           cfg.seed + 1 + static_cast<std::uint64_t>(i),
                                           cfg.base_dir, &kind));
  }
  RVec target_psd;
  if (cfg.target.psd) {
    target_psd = Eigen::Map<const RVec>(cfg.target.psd->data(), bins);
  } else if (cfg.target.psd_flat) {
    target_psd = RVec::Constant(bins, *cfg.target.psd_flat);
  } else {
    target_psd = engine::estimate_psd(target_wave, sp);
  }
  std::vector<RVec> interferer_psd;
  for (std::size_t i = 0; i < cfg.interferers.size(); ++i) {
    if (cfg.interferers[i].psd) {
      interferer_psd.emplace_back(Eigen::Map<const RVec>(cfg.interferers[i].psd->data(), bins));
    } else if (cfg.interferers[i].psd_flat) {
      interferer_psd.emplace_back(RVec::Constant(bins, *cfg.interferers[i].psd_flat));
    } else {
      interferer_psd.push_back(engine::estimate_psd(interferer_waves[i], sp));
    }
  }

  // ATFs (shared across r; activation truncates the list)
  const std::vector<CVec> target_atf = source_atfs(cfg.target, geom, sp.fft_size, cfg.base_dir);
  std::vector<std::vector<CVec>> interferer_atf;
  for (const auto& src : cfg.interferers)
    interferer_atf.push_back(source_atfs(src, geom, sp.fft_size, cfg.base_dir));

  for (int r : cfg.r_values) {
    engine::SceneSpectra spectra;
    spectra.geometry = geom;
    spectra.stft = sp;
    spectra.target_atf = target_atf;
    spectra.target_psd = target_psd;
    spectra.self_noise_power = sigma2;
    spectra.interferer_atfs.assign(interferer_atf.begin(), interferer_atf.begin() + r);
    spectra.interferer_psds.resize(bins, r);
    for (int i = 0; i < r; ++i) spectra.interferer_psds.col(i) = interferer_psd[static_cast<std::size_t>(i)];
    spectra.noise_cpsd.reserve(static_cast<std::size_t>(bins));
    spectra.target_cpsd.reserve(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
      std::vector<CVec> atfs_k;
      atfs_k.reserve(static_cast<std::size_t>(r));
      for (int i = 0; i < r; ++i) atfs_k.push_back(interferer_atf[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
      spectra.noise_cpsd.push_back(
          scene::build_noise_cpsd(atfs_k, spectra.interferer_psds.row(k).transpose(), sigma2, geom.mics()).p);
      const CVec& a = target_atf[static_cast<std::size_t>(k)];
      spectra.target_cpsd.push_back(target_psd[k] * a * a.adjoint());
    }

    // rendered microphone signals for the processing path
    std::vector<scene::SourceDescriptor> sources;
    std::vector<RVec> waves;
    {
      scene::SourceDescriptor t;
      t.kind = scene::SourceKind::kTarget;
      t.impulse_responses = source_irs(cfg.target, geom, cfg.base_dir);
      sources.push_back(std::move(t));
      waves.push_back(target_wave);
      for (int i = 0; i < r; ++i) {
        scene::SourceDescriptor s;
        s.kind = scene::SourceKind::kInterferer;
        s.impulse_responses = source_irs(cfg.interferers[static_cast<std::size_t>(i)], geom, cfg.base_dir);
        sources.push_back(std::move(s));
        waves.push_back(interferer_waves[static_cast<std::size_t>(i)]);
      }
    }
    scene::RenderOptions ro;
    ro.self_noise_sigma = cfg.self_noise_sigma;
    ro.seed = cfg.seed + 1000003ull * static_cast<std::uint64_t>(r);
    const RMat mic = scene::render_microphone_signals(geom, sources, waves, ro);
    const stft::TfTensor mic_tensor = stft::analyze(mic, sp);
    result.frames = mic_tensor.frames();

    metrics::CpsdSequence cpsds;
    cpsds.target = spectra.target_cpsd;
    cpsds.noise = spectra.noise_cpsd;
    cpsds.frames = mic_tensor.frames();
    const metrics::BandEdges bands = metrics::BandEdges::from_rates(cfg.sample_rate, sp.fft_size);

    // BMVDR reference for the error-ratio metric
    engine::MethodSpec bmvdr_spec;
    bmvdr_spec.kind = engine::MethodKind::kBmvdr;
    const engine::FilterBank bmvdr_bank =
        engine::compute_filter_bank(spectra, bmvdr_spec, options.threads);
    const std::vector<metrics::CueRecord> bmvdr_records =
        engine::cue_records(spectra, bmvdr_bank.filters);

    for (const engine::MethodSpec& method : cfg.methods) {
      const engine::FilterBank bank =
          method.kind == engine::MethodKind::kBmvdr
              ? bmvdr_bank
              : engine::compute_filter_bank(spectra, method, options.threads);
      const std::vector<metrics::CueRecord> records = engine::cue_records(spectra, bank.filters);
      const metrics::TotalErrors totals = metrics::total_errors(records, bands, r);
      const metrics::AverageRatio ratio =
          metrics::average_itf_error_ratio(records, bmvdr_records, r);
      const metrics::GsSnr snr = metrics::gs_snr(cpsds, bank.filters, geom.refs);

      const stft::TfTensor processed = stft::apply_binaural_filter(mic_tensor, bank.filters);
      const RMat out_wave = stft::synthesize(processed);
      const double n_out = static_cast<double>(out_wave.rows());

      SweepRow row;
      row.method = method.label();
      row.r = r;
      if (method.kind == engine::MethodKind::kRelaxed) {
        row.c = method.c;
        row.k_max = method.k_max;
      }
      row.gs_snr_in_db = snr.in_db;
      row.gs_snr_out_db = snr.out_db;
      row.gs_snr_gain_db = snr.gain_db;
      row.tot_er_itf = totals.itf;
      row.tot_er_ild = totals.ild;
      row.tot_er_ipd = totals.ipd;
      row.av_er_itf = ratio.value;
      row.mean_iterations = bank.mean_iterations;
      row.fallback_bins = bank.fallback_bins;
      row.exhausted_bins = bank.exhausted_bins;
      row.degenerate_bins = bank.degenerate_bins;
      row.ratio_excluded = ratio.excluded;
      row.out_rms_left = std::sqrt(out_wave.col(0).squaredNorm() / n_out);
      row.out_rms_right = std::sqrt(out_wave.col(1).squaredNorm() / n_out);
      row.seed = cfg.seed;
      row.iteration_histogram = bank.iteration_histogram;
      result.rows.push_back(std::move(row));

      if (options.dump_bins) {
        BinDump dump;
        dump.method = method.label();
        dump.r = r;
        dump.filters = bank.filters;
        dump.itf_errors.reserve(records.size());
        for (const auto& rec : records) dump.itf_errors.push_back(rec.itf_error);
        result.bin_dumps.push_back(std::move(dump));
      }

      if (cfg.emit_audio) {
        wav::Waveform out_wav;
        out_wav.sample_rate = static_cast<int>(cfg.sample_rate);
        out_wav.samples = out_wave;
        const fs::path dir = fs::path(cfg.base_dir) / cfg.output_dir;
        fs::create_directories(dir);
        wav::write((dir / ("out_" + method.label() + "_r" + std::to_string(r) + ".wav")).string(),
                   out_wav);
      }
    }
  }

  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.r != b.r) return a.r < b.r;
    const double ca = std::isnan(a.c) ? -1.0 : a.c;
    const double cb = std::isnan(b.c) ? -1.0 : b.c;
    if (ca != cb) return ca < cb;
    return a.k_max < b.k_max;
  });
  return result;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "method,r,c,k_max,gs_snr_in_db,gs_snr_out_db,gs_snr_gain_db,tot_er_itf,tot_er_ild,"
        "tot_er_ipd,av_er_itf,mean_iterations,fallback_bins,exhausted_bins,degenerate_bins,"
        "ratio_excluded,out_rms_left,out_rms_right,seed\r\n";
  for (const SweepRow& r : rows) {
    os << csv_quote(r.method) << ',' << r.r << ',' << fmt_double(r.c) << ',' << r.k_max << ','
       << fmt_double(r.gs_snr_in_db) << ',' << fmt_double(r.gs_snr_out_db) << ','
       << fmt_double(r.gs_snr_gain_db) << ',' << fmt_double(r.tot_er_itf) << ','
       << fmt_double(r.tot_er_ild) << ',' << fmt_double(r.tot_er_ipd) << ','
       << fmt_double(r.av_er_itf) << ',' << fmt_double(r.mean_iterations) << ','
       << r.fallback_bins << ',' << r.exhausted_bins << ',' << r.degenerate_bins << ','
       << r.ratio_excluded << ',' << fmt_double(r.out_rms_left) << ','
       << fmt_double(r.out_rms_right) << ',' << r.seed << "\r\n";
  }
  return os.str();
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      fields.push_back(cur);
      cur.clear();
      if (!(fields.size() == 1 && fields[0].empty())) lines.push_back(fields);
      fields.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty() || !fields.empty()) {
    fields.push_back(cur);
    lines.push_back(fields);
  }
  std::vector<SweepRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {  // skip header
    const auto& f = lines[li];
    if (f.size() != 19) throw IoError("csv parse: expected 19 fields, got " + std::to_string(f.size()));
    SweepRow r;
    auto num = [](const std::string& s) {
      return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    };
    r.method = f[0];
    r.r = std::stoi(f[1]);
    r.c = num(f[2]);
    r.k_max = std::stoi(f[3]);
    r.gs_snr_in_db = num(f[4]);
    r.gs_snr_out_db = num(f[5]);
    r.gs_snr_gain_db = num(f[6]);
    r.tot_er_itf = num(f[7]);
    r.tot_er_ild = num(f[8]);
    r.tot_er_ipd = num(f[9]);
    r.av_er_itf = num(f[10]);
    r.mean_iterations = num(f[11]);
    r.fallback_bins = std::stoi(f[12]);
    r.exhausted_bins = std::stoi(f[13]);
    r.degenerate_bins = std::stoi(f[14]);
    r.ratio_excluded = std::stoi(f[15]);
    r.out_rms_left = num(f[16]);
    r.out_rms_right = num(f[17]);
    r.seed = std::stoull(f[18]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_results(const SweepResult& result, const config::ExperimentConfig& cfg,
                  const std::string& dir) {
  fs::create_directories(dir);
  write_atomic(dir, "results.csv", to_csv(result.rows));

  json rows = json::array();
  for (const SweepRow& row : result.rows) rows.push_back(row_to_json(row));
  json results{{"rows", rows}, {"bins", result.bins}, {"frames", result.frames},
               {"filter_frames", 1}, {"seed", result.seed}};
  write_atomic(dir, "results.json", results.dump(2) + "\n");

  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(m.label());
  json meta{{"version", kVersion},
            {"seed", cfg.seed},
            {"sample_rate", cfg.sample_rate},
            {"speed_of_sound", cfg.speed_of_sound},
            {"duration_s", cfg.duration_s},
            {"self_noise_sigma", cfg.self_noise_sigma},
            {"stft", {{"frame_length", cfg.stft.frame_length},
                      {"hop", cfg.stft.hop},
                      {"fft_size", cfg.stft.fft_size}}},
            {"mics", cfg.mic_positions.size()},
            {"interferers", cfg.interferers.size()},
            {"r_values", cfg.r_values},
            {"methods", methods},
            {"psd_estimator", "long-term periodogram average over STFT frames"},
            {"filter_frames", 1},
            {"notes", "filters are frame-constant; cue metrics broadcast across frames"}};
  write_atomic(dir, "run_meta.json", meta.dump(2) + "\n");

  if (!result.bin_dumps.empty()) {
    json dumps = json::array();
    for (const BinDump& d : result.bin_dumps) {
      json filters = json::array();
      for (const auto& f : d.filters) {
        json w = json::array();
        for (Eigen::Index i = 0; i < f.w.size(); ++i)
          w.push_back(json::array({f.w[i].real(), f.w[i].imag()}));
        filters.push_back(std::move(w));
      }
      dumps.push_back(json{{"method", d.method},
                           {"r", d.r},
                           {"filters", filters},
                           {"itf_errors", d.itf_errors}});
    }
    write_atomic(dir, "bins.json", dumps.dump() + "\n");
  }
}

}  // namespace beamform::runner
