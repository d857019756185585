// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/types.hpp"

namespace beamform::socp {

/// Real-lifted standard-form cone program for one per-bin subproblem:
///
///   min t  s.t.  Phi1^T wv = q1,
///                | R wv |_2 <= t,
///                | G_i wv |_2 <= cone_bound_i,  i = 1..m,
///
/// where wv in R^{4M} is the real lift [Re wL; Im wL; Re wR; Im wR] of the
/// stacked complex filter and R^T R is the (normalized) real lift of
/// diag(P, P). Cone matrices come from the relative-ATF form of the
/// constraints; bounds passed to lift_subproblem are in the ATF form
/// |e_i w_R^H b_i b_iR| and are converted by 1/(|b_iL| |b_iR|) here.
struct SocpProblem {
  int mics = 0;
  RMat r_factor;             // 4M x 4M, R^T R = lifted diag(P,P) / p_scale
  double p_scale = 1.0;      // normalization factor taken out of P
  RMat phi1;                 // 4M x 4, equality lhs (columns)
  RVec q1;                   // [1, 1, 0, 0]
  std::vector<RMat> cone_g;  // each 2 x 4M
  RVec cone_bound;           // relative-ATF-scale bounds q_{2,i}
  RVec zeta;                 // |conj(aL/aR) conj(b_iR/b_iL) - 1| per interferer
  RefPair refs;
};

enum class SocpStatus { kOptimal, kInfeasible, kMaxIterations };

struct SocpSolution {
  RVec w_lift;          // 4M real solution
  CVec w;               // un-lifted stacked complex filter
  double t_star = 0.0;  // sqrt(w^H Ptilde w), original scale
  double noise_power = 0.0;
  SocpStatus status = SocpStatus::kMaxIterations;
  double duality_gap = 0.0;
  double comp_residual = 0.0;  // max |s o z| entry at exit
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::vector<double> gap_history;  // accepted-step duality gaps
};

/// Real lift [Re P, -Im P; Im P, Re P] of a Hermitian matrix.
RMat real_lift(const CMat& p);

/// [Re wL; Im wL; Re wR; Im wR] and its inverse.
RVec lift_vector(const CVec& w);
CVec unlift_vector(const RVec& wv);

/// Builds the lifted subproblem. atf_bounds holds the ATF-form right-hand
/// sides |e_i(tau) wR^H b_i b_iR| (one per interferer); reference entries of
/// a and every b_i must pass the scene magnitude guard.
SocpProblem lift_subproblem(const lcmv::BlockCpsd& p, const CVec& a,
                            const std::vector<CVec>& interferers, RefPair refs,
                            const RVec& atf_bounds);

struct SocpSettings {
  double tolerance = 1e-9;  // duality gap target
  int max_iterations = 200;
  double feas_tolerance = 1e-9;
};

/// Primal-dual Nesterov-Todd interior point with Mehrotra predictor-corrector
/// and fraction-to-boundary 0.99. The 4-row equality block (plus any cone
/// whose bound is zero, which degenerates to an equality) is eliminated by an
/// orthonormal nullspace parameterization before the cone iterations.
SocpSolution solve_socp(const SocpProblem& problem, const SocpSettings& settings = {});

}  // namespace beamform::socp
