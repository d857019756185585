// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "beamform/types.hpp"

namespace beamform::lcmv {

/// Stacked binaural filter w = [wL; wR] of length 2M.
struct BinauralFilter {
  CVec w;
  RefPair refs;

  int mics() const { return static_cast<int>(w.size()) / 2; }
  auto left() const { return w.head(mics()); }
  auto right() const { return w.tail(mics()); }
};

/// Selection-vector pass-through: wL = e_refLeft, wR = e_refRight.
BinauralFilter passthrough_filter(int mics, RefPair refs);

/// Block-diagonal disturbance CPSD diag(P, P) with diagonal loading applied
/// once at construction so every solver sees the same regularized matrix.
class BlockCpsd {
 public:
  /// Loads P with eps = kLoadingScale * trace(P)/M before anything inverts it.
  static BlockCpsd from_noise(const CMat& p);

  static constexpr double kLoadingScale = 1e-9;

  const CMat& p() const { return p_; }
  int mics() const { return static_cast<int>(p_.rows()); }

  /// Materialized 2M x 2M block-diagonal lift.
  CMat lift() const;

  /// w^H diag(P, P) w for a stacked filter.
  double quad(const CVec& w) const;

  /// Solves P X = B using the cached Cholesky factor.
  CMat solve(const CMat& b) const;

 private:
  CMat p_;
  Eigen::LLT<CMat> llt_;
};

/// Linear equality constraints Lambda^H w = f. The first d1 columns are
/// always the two target distortionless columns.
struct ConstraintSet {
  CMat lambda;  // 2M x d
  CVec f;       // d
  int d1 = 2;
  std::string method_tag;
  int truncated_interferers = 0;

  int d() const { return static_cast<int>(lambda.cols()); }
};

/// Two distortionless constraints w_L^H a = a_L and w_R^H a = a_R.
ConstraintSet target_constraints(const CVec& a, RefPair refs);

/// Target constraints plus two per-interferer rejection constraints
/// w_L^H b_i = eta_L b_iL, w_R^H b_i = eta_R b_iR. Requires 0 <= eta < 1.
/// Interferers beyond M - 2 are dropped with a warning.
ConstraintSet blcmv_constraints(const CVec& a, const std::vector<CVec>& interferers, double eta_left,
                                double eta_right, RefPair refs);

/// Target constraints plus one cue-preservation column per interferer,
/// column i = [b_i b_iR; -b_i b_iL] with response 0. Interferers beyond
/// 2M - 3 are dropped with a warning.
ConstraintSet jblcmv_constraints(const CVec& a, const std::vector<CVec>& interferers, RefPair refs);

/// Minimizes w^H diag(P,P) w subject to Lambda^H w = f.
/// d < 2M uses the Cholesky/Gram route; d = 2M solves the square system.
BinauralFilter solve_gblcmv(const BlockCpsd& p, const ConstraintSet& constraints, RefPair refs);

/// Closed-form binaural MVDR: wL = P^-1 a aL* / (a^H P^-1 a), likewise wR.
BinauralFilter bmvdr(const BlockCpsd& p, const CVec& a, RefPair refs);

struct OblcmvResult {
  BinauralFilter filter;
  cplx eta;
  double snr = 0.0;  // attained per-bin output SNR with unit target PSD
};

/// BLCMV with a single constrained interferer and a complex rejection
/// parameter chosen to maximize the per-bin binaural output SNR. The search
/// is a coarse grid on the disc |eta| <= 1 refined by Nelder-Mead.
OblcmvResult oblcmv(const BlockCpsd& p, const CVec& a, const CVec& b_k, RefPair refs);

/// |Lambda^H w - f|, the constraint residual a solver output must keep below
/// 1e-10 (1 + |f|).
double constraint_residual(const ConstraintSet& constraints, const CVec& w);

}  // namespace beamform::lcmv
