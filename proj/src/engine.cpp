// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/engine.hpp"

#include <omp.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beamform/errors.hpp"
#include "beamform/log.hpp"

namespace beamform::engine {
namespace {

struct BinOutcome {
  lcmv::BinauralFilter filter;
  int iterations = 0;
  bool fallback = false;
  bool exhausted = false;
  bool degenerate = false;
  int dropped = 0;
};

BinOutcome solve_bin(const SceneSpectra& spectra, const MethodSpec& method, int bin) {
  const RefPair refs = spectra.geometry.refs;
  const CVec& a = spectra.target_atf[static_cast<std::size_t>(bin)];
  const lcmv::BlockCpsd p = lcmv::BlockCpsd::from_noise(spectra.noise_cpsd[static_cast<std::size_t>(bin)]);

  BinOutcome out;
  // drop interferers whose reference entries fail the magnitude guard
  std::vector<CVec> usable;
  usable.reserve(spectra.interferer_atfs.size());
  for (const auto& atfs : spectra.interferer_atfs) {
    const CVec& b = atfs[static_cast<std::size_t>(bin)];
    if (scene::reference_entries_usable(b, refs)) {
      usable.push_back(b);
    } else {
      ++out.dropped;
    }
  }
  const bool target_ok = scene::reference_entries_usable(a, refs);
  if (out.dropped > 0 || !target_ok) out.degenerate = true;

  switch (method.kind) {
    case MethodKind::kBmvdr:
      out.filter = lcmv::bmvdr(p, a, refs);
      break;
    case MethodKind::kBlcmv: {
      const auto cs = lcmv::blcmv_constraints(a, usable, method.eta_left, method.eta_right, refs);
      out.filter = lcmv::solve_gblcmv(p, cs, refs);
      break;
    }
    case MethodKind::kOblcmv: {
      if (usable.empty() || p.mics() < 3) {
        out.filter = lcmv::bmvdr(p, a, refs);
        out.fallback = true;
      } else {
        out.filter = lcmv::oblcmv(p, a, usable.front(), refs).filter;
      }
      break;
    }
    case MethodKind::kJblcmv: {
      const auto cs = lcmv::jblcmv_constraints(a, usable, refs);
      out.filter = lcmv::solve_gblcmv(p, cs, refs);
      break;
    }
    case MethodKind::kRelaxed: {
      if (!target_ok) {
        // the relative-ATF lift divides by the target references; fall back to
        // the strict closed form at this bin
        const auto cs = lcmv::jblcmv_constraints(a, usable, refs);
        out.filter = lcmv::solve_gblcmv(p, cs, refs);
        out.fallback = true;
        break;
      }
      relaxed::RelaxationParams params;
      params.c = RVec::Constant(static_cast<Eigen::Index>(usable.size()), method.c);
      params.k_max = method.k_max;
      const relaxed::RelaxedSolution rs = relaxed::relaxed_beamformer(p, a, usable, refs, params);
      out.filter = rs.filter;
      out.iterations = rs.iterations_used;
      out.fallback = rs.status == relaxed::RelaxedStatus::kFallback;
      out.exhausted = rs.status == relaxed::RelaxedStatus::kExhaustedKmax;
      break;
    }
  }
  return out;
}

FilterBank collect(const SceneSpectra& spectra, std::vector<BinOutcome>&& outcomes) {
  FilterBank bank;
  const int bins = spectra.bins();
  bank.filters.reserve(static_cast<std::size_t>(bins));
  bank.iterations.reserve(static_cast<std::size_t>(bins));
  long iter_sum = 0;
  for (BinOutcome& o : outcomes) {
    bank.filters.push_back(std::move(o.filter));
    bank.iterations.push_back(o.iterations);
    ++bank.iteration_histogram[o.iterations];
    iter_sum += o.iterations;
    if (o.fallback) ++bank.fallback_bins;
    if (o.exhausted) ++bank.exhausted_bins;
    if (o.degenerate) ++bank.degenerate_bins;
    bank.dropped_constraints += o.dropped;
  }
  bank.mean_iterations = bins > 0 ? static_cast<double>(iter_sum) / bins : 0.0;
  return bank;
}

}  // namespace

std::string MethodSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case MethodKind::kBmvdr: return "bmvdr";
    case MethodKind::kOblcmv: return "oblcmv";
    case MethodKind::kJblcmv: return "jblcmv";
    case MethodKind::kBlcmv:
      os << "blcmv_eta" << eta_left;
      if (eta_right != eta_left) os << "_" << eta_right;
      return os.str();
    case MethodKind::kRelaxed:
      os << "relaxed_c" << c << "_k" << k_max;
      return os.str();
  }
  return "unknown";
}

FilterBank compute_filter_bank_serial(const SceneSpectra& spectra, const MethodSpec& method) {
  const int bins = spectra.bins();
  std::vector<BinOutcome> outcomes(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) outcomes[static_cast<std::size_t>(k)] = solve_bin(spectra, method, k);
  return collect(spectra, std::move(outcomes));
}

FilterBank compute_filter_bank(const SceneSpectra& spectra, const MethodSpec& method, int threads) {
  const int bins = spectra.bins();
  std::vector<BinOutcome> outcomes(static_cast<std::size_t>(bins));
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  std::string first_error;
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int k = 0; k < bins; ++k) {
    try {
      outcomes[static_cast<std::size_t>(k)] = solve_bin(spectra, method, k);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw Error("filter bank: " + first_error);
  return collect(spectra, std::move(outcomes));
}

RVec white_noise(int samples, std::uint64_t seed) {
  scene::GaussianRng rng(seed);
  RVec x(samples);
  for (int i = 0; i < samples; ++i) x[i] = rng();
  const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(samples));
  return rms > 0.0 ? RVec(x / rms) : x;
}

RVec speech_shaped_noise(int samples, std::uint64_t seed) {
  scene::GaussianRng rng(seed);
  RVec x(samples);
  constexpr double kPole = 0.8;
  double state = 0.0;
  for (int i = 0; i < samples; ++i) {
    state = (1.0 - kPole) * rng() + kPole * state;
    x[i] = state;
  }
  const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(samples));
  return rms > 0.0 ? RVec(x / rms) : x;
}

RVec estimate_psd(const RVec& waveform, const stft::StftParams& params) {
  RMat mono(waveform.size(), 1);
  mono.col(0) = waveform;
  const stft::TfTensor tensor = stft::analyze(mono, params);
  RVec psd = RVec::Zero(params.bins());
  for (int l = 0; l < tensor.frames(); ++l)
    for (int k = 0; k < params.bins(); ++k) psd[k] += std::norm(tensor.at(l, k, 0));
  if (tensor.frames() > 0) psd /= static_cast<double>(tensor.frames());
  return psd;
}

std::vector<metrics::CueRecord> cue_records(const SceneSpectra& spectra,
                                            const std::vector<lcmv::BinauralFilter>& bank) {
  std::vector<metrics::CueRecord> records;
  const int bins = spectra.bins();
  const int r = spectra.interferers();
  records.reserve(static_cast<std::size_t>(bins) * static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < bins; ++k) {
      metrics::CueRecord rec = metrics::binaural_cues(bank[static_cast<std::size_t>(k)],
                                                      spectra.interferer_atfs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                                                      spectra.geometry.refs);
      rec.interferer = i;
      rec.bin = k;
      rec.frame = 0;
      records.push_back(rec);
    }
  }
  return records;
}

}  // namespace beamform::engine
