// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/socp.hpp"
#include "beamform/types.hpp"

namespace beamform::relaxed {

/// Per-interferer trade-off parameters. c_i = 1 allows the full BMVDR cue
/// collapse of interferer i, c_i = 0 demands exact preservation.
struct RelaxationParams {
  RVec c;             // one entry per interferer, all in [0, 1]
  int k_max = 10;     // >= 1
  socp::SocpSettings solver;

  void validate(int interferer_count) const;
};

enum class RelaxedStatus { kConvergedByCriterion, kExhaustedKmax, kFallback };

struct RelaxedSolution {
  lcmv::BinauralFilter filter;
  int iterations_used = 0;
  RVec final_errors;  // per-interferer ITF error of the returned filter
  RVec budgets;       // e_i(c) evaluated against the BMVDR reference
  RelaxedStatus status = RelaxedStatus::kConvergedByCriterion;
};

/// e_i(c_i) = c_i * E_{i,BMVDR}.
double relaxation_budget(double c_i, double bmvdr_itf_error);

/// tau_next = tau_prev - c/k_max, floored at zero. Values within rounding
/// noise of zero snap to exactly zero so the schedule ends on 0.
double tau_step(double tau_prev, double c, int k_max);

/// |wL^H b / wR^H b - bL/bR|. A denominator below the relative guard yields
/// +infinity and a log entry instead of a division blow-up.
double itf_error(const lcmv::BinauralFilter& filter, const CVec& b, RefPair refs);

/// True iff every error is within its budget. Budgets always use the
/// original c, never the shrinking tau.
bool stopping_criterion(const RVec& errors, const RVec& budgets);

/// Absolute slack the iterative beamformer adds to the budgets before the
/// criterion check. Zero-budget constraints (c_i = 0) are solved as strict
/// equalities whose residual floats near machine noise, so an exact check
/// could never pass; the slack stays an order below the documented 1e-8
/// solver-tolerance allowance on the error bound.
inline constexpr double kCriterionSlack = 1e-9;

/// Iterative relaxed binaural LCMV: BMVDR initialization, per-iteration
/// convex subproblems with shrinking tau bounds, stop at the first iterate
/// whose ITF errors all fit their budgets. The final iteration tightens to
/// the strict-constraint problem on at most 2M-3 interferers.
RelaxedSolution relaxed_beamformer(const lcmv::BlockCpsd& p, const CVec& a,
                                   const std::vector<CVec>& interferers, RefPair refs,
                                   const RelaxationParams& params);

}  // namespace beamform::relaxed
