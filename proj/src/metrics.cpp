// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "beamform/errors.hpp"
#include "beamform/log.hpp"

namespace beamform::metrics {

double wrap_phase(double x) {
  double w = std::remainder(x, 2.0 * kPi);  // lands in [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

CueRecord binaural_cues(const lcmv::BinauralFilter& filter, const CVec& b, RefPair refs) {
  CueRecord rec;
  const cplx b_l = b[refs.left];
  const cplx b_r = b[refs.right];
  const cplx num = filter.left().dot(b);
  const cplx den = filter.right().dot(b);
  const double guard = 1e-14 * std::max(filter.w.norm() * b.norm(), 1e-300);
  if (b_r == cplx(0.0, 0.0) || std::abs(den) <= guard) {
    rec.valid = false;
    return rec;
  }
  rec.itf_in = b_l / b_r;
  rec.itf_out = num / den;
  rec.ild_in = std::norm(rec.itf_in);
  rec.ild_out = std::norm(rec.itf_out);
  rec.ipd_in = std::arg(rec.itf_in);
  rec.ipd_out = std::arg(rec.itf_out);
  const CueErrors e = cue_errors(rec);
  rec.itf_error = e.itf;
  rec.ild_error = e.ild;
  rec.ipd_error = e.ipd;
  return rec;
}

CueErrors cue_errors(const CueRecord& record) {
  CueErrors e;
  e.itf = std::abs(record.itf_out - record.itf_in);
  e.ild = std::abs(record.ild_out - record.ild_in);
  e.ipd = std::abs(wrap_phase(record.ipd_out - record.ipd_in)) / kPi;
  return e;
}

BandEdges BandEdges::from_rates(double sample_rate, int fft_size, double ild_low_hz,
                                double ipd_high_hz) {
  BandEdges b;
  b.bins = fft_size / 2 + 1;
  const double hz_per_bin = sample_rate / static_cast<double>(fft_size);
  b.k_ild = static_cast<int>(std::ceil(ild_low_hz / hz_per_bin));
  b.k_ipd = static_cast<int>(std::floor(ipd_high_hz / hz_per_bin));
  if (b.k_ild >= b.bins) throw ConfigError("bands: ILD band is empty");
  if (b.k_ipd < 1) throw ConfigError("bands: IPD band is empty");
  b.k_ipd = std::min(b.k_ipd, b.bins - 1);
  return b;
}

namespace {

// frame-mean accumulator per (interferer, bin)
struct Cell {
  double sum_ild = 0.0;
  double sum_ipd = 0.0;
  double sum_itf = 0.0;
  int count = 0;
};

}  // namespace

TotalErrors total_errors(const std::vector<CueRecord>& records, const BandEdges& bands,
                         int interferer_count) {
  if (interferer_count <= 0) throw InvalidInputError("total errors: need at least one interferer");
  TotalErrors out;
  std::vector<std::map<int, Cell>> cells(static_cast<std::size_t>(interferer_count));
  for (const CueRecord& r : records) {
    if (!r.valid) {
      ++out.excluded_records;
      continue;
    }
    if (r.interferer < 0 || r.interferer >= interferer_count)
      throw InvalidInputError("total errors: interferer index out of range");
    Cell& c = cells[static_cast<std::size_t>(r.interferer)][r.bin];
    c.sum_ild += r.ild_error;
    c.sum_ipd += r.ipd_error;
    c.sum_itf += r.itf_error;
    ++c.count;
  }
  for (int i = 0; i < interferer_count; ++i) {
    double ild_bin_sum = 0.0;
    int ild_bins = 0;
    double ipd_bin_sum = 0.0;
    int ipd_bins = 0;
    double itf_bin_sum = 0.0;
    int itf_bins = 0;
    for (const auto& [bin, cell] : cells[static_cast<std::size_t>(i)]) {
      const double inv = 1.0 / static_cast<double>(cell.count);
      const double mean_ild = cell.sum_ild * inv;
      const double mean_ipd = cell.sum_ipd * inv;
      const double mean_itf = cell.sum_itf * inv;
      itf_bin_sum += mean_itf;
      ++itf_bins;
      if (bin >= bands.k_ild && bin < bands.bins) {
        ild_bin_sum += mean_ild;
        ++ild_bins;
      }
      if (bin >= 1 && bin <= bands.k_ipd) {
        ipd_bin_sum += mean_ipd;
        ++ipd_bins;
      }
    }
    if (ild_bins > 0) out.ild += ild_bin_sum / static_cast<double>(ild_bins);
    if (ipd_bins > 0) out.ipd += ipd_bin_sum / static_cast<double>(ipd_bins);
    if (itf_bins > 0) out.itf += itf_bin_sum / static_cast<double>(itf_bins);
  }
  return out;
}

AverageRatio average_itf_error_ratio(const std::vector<CueRecord>& proposed,
                                     const std::vector<CueRecord>& bmvdr, int interferer_count) {
  if (proposed.size() != bmvdr.size())
    throw InvalidInputError("itf ratio: record lists must be index-aligned");
  if (interferer_count <= 0) throw InvalidInputError("itf ratio: need at least one interferer");

  // nested means: frame mean per (i, bin), bin mean per i, mean over i
  struct RatioCell {
    double sum = 0.0;
    int count = 0;
  };
  std::vector<std::map<int, RatioCell>> cells(static_cast<std::size_t>(interferer_count));
  AverageRatio out;
  for (std::size_t idx = 0; idx < proposed.size(); ++idx) {
    const CueRecord& p = proposed[idx];
    const CueRecord& q = bmvdr[idx];
    if (p.interferer != q.interferer || p.bin != q.bin || p.frame != q.frame)
      throw InvalidInputError("itf ratio: record lists must be index-aligned");
    if (!p.valid || !q.valid || q.itf_error < kRatioZeroGuard) {
      ++out.excluded;
      continue;
    }
    RatioCell& c = cells[static_cast<std::size_t>(p.interferer)][p.bin];
    c.sum += p.itf_error / q.itf_error;
    ++c.count;
  }
  double sum_i = 0.0;
  int n_i = 0;
  for (int i = 0; i < interferer_count; ++i) {
    double bin_sum = 0.0;
    int bins = 0;
    for (const auto& [bin, cell] : cells[static_cast<std::size_t>(i)]) {
      bin_sum += cell.sum / static_cast<double>(cell.count);
      ++bins;
    }
    if (bins > 0) {
      sum_i += bin_sum / static_cast<double>(bins);
      ++n_i;
    }
  }
  if (n_i == 0) throw UndefinedRatioError("itf ratio: every entry fell below the zero guard");
  out.value = sum_i / static_cast<double>(n_i);
  return out;
}

GsSnr gs_snr(const CpsdSequence& cpsds, const std::vector<lcmv::BinauralFilter>& filters,
             RefPair refs) {
  const int bins = static_cast<int>(cpsds.target.size());
  if (bins == 0 || cpsds.noise.size() != static_cast<std::size_t>(bins))
    throw InvalidInputError("gs snr: target/noise CPSD lists must match");
  if (!filters.empty() && static_cast<int>(filters.size()) != bins)
    throw InvalidInputError("gs snr: filter bank must hold one filter per bin");
  if (cpsds.frames < 1) throw InvalidInputError("gs snr: need at least one frame");

  const int m = static_cast<int>(cpsds.target.front().rows());
  const lcmv::BinauralFilter pass = lcmv::passthrough_filter(m, refs);

  // per-bin quadratic forms are frame independent; scales modulate per frame
  double in_num = 0.0, in_den = 0.0, out_num = 0.0, out_den = 0.0;
  for (int k = 0; k < bins; ++k) {
    const CMat& px = cpsds.target[static_cast<std::size_t>(k)];
    const CMat& pn = cpsds.noise[static_cast<std::size_t>(k)];
    in_num += px(refs.left, refs.left).real() + px(refs.right, refs.right).real();
    in_den += pn(refs.left, refs.left).real() + pn(refs.right, refs.right).real();
    const lcmv::BinauralFilter& f = filters.empty() ? pass : filters[static_cast<std::size_t>(k)];
    const auto wl = f.left();
    const auto wr = f.right();
    out_num += (wl.dot(px * wl) + wr.dot(px * wr)).real();
    out_den += (wl.dot(pn * wl) + wr.dot(pn * wr)).real();
  }

  GsSnr result;
  double sum_in = 0.0, sum_out = 0.0;
  int used = 0;
  for (int l = 0; l < cpsds.frames; ++l) {
    const double sx = cpsds.target_frame_scale.size() == cpsds.frames ? cpsds.target_frame_scale[l] : 1.0;
    const double sn = cpsds.noise_frame_scale.size() == cpsds.frames ? cpsds.noise_frame_scale[l] : 1.0;
    const double den_in = sn * in_den;
    const double den_out = sn * out_den;
    if (den_in <= 0.0 || den_out <= 0.0) {
      ++result.skipped_frames;
      continue;
    }
    const double snr_in = 10.0 * std::log10((sx * in_num) / den_in);
    const double snr_out = 10.0 * std::log10((sx * out_num) / den_out);
    sum_in += std::clamp(snr_in, kSnrClampLoDb, kSnrClampHiDb);
    sum_out += std::clamp(snr_out, kSnrClampLoDb, kSnrClampHiDb);
    ++used;
  }
  if (used == 0) {
    log::warn("gs snr: every frame skipped (zero denominator energy)");
    return result;
  }
  result.in_db = sum_in / static_cast<double>(used);
  result.out_db = sum_out / static_cast<double>(used);
  result.gain_db = result.out_db - result.in_db;
  if (result.skipped_frames > 0)
    log::warn("gs snr: skipped " + std::to_string(result.skipped_frames) + " frame(s)");
  return result;
}

}  // namespace beamform::metrics
