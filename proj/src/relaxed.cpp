// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beamform/errors.hpp"
#include "beamform/log.hpp"

namespace beamform::relaxed {
namespace {

RVec all_itf_errors(const lcmv::BinauralFilter& f, const std::vector<CVec>& interferers,
                    RefPair refs) {
  RVec e(static_cast<Eigen::Index>(interferers.size()));
  for (std::size_t i = 0; i < interferers.size(); ++i)
    e[static_cast<Eigen::Index>(i)] = itf_error(f, interferers[i], refs);
  return e;
}

// One strict-constraint (JBLCMV) solve through the cone machinery, truncated
// to the first 2M-3 interferers.
socp::SocpSolution solve_strict(const lcmv::BlockCpsd& p, const CVec& a,
                                const std::vector<CVec>& interferers, RefPair refs,
                                const socp::SocpSettings& settings) {
  const int m = p.mics();
  const int cap = std::max(2 * m - 3, 0);
  std::vector<CVec> used(interferers.begin(),
                         interferers.begin() + std::min<std::size_t>(interferers.size(),
                                                                     static_cast<std::size_t>(cap)));
  const RVec zero_bounds = RVec::Zero(static_cast<Eigen::Index>(used.size()));
  const socp::SocpProblem prob = socp::lift_subproblem(p, a, used, refs, zero_bounds);
  return socp::solve_socp(prob, settings);
}

}  // namespace

void RelaxationParams::validate(int interferer_count) const {
  if (c.size() != interferer_count)
    throw ParameterError("relaxed: need one c value per interferer");
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] < 0.0 || c[i] > 1.0)
      throw ParameterError("relaxed: c must lie in [0, 1], got " + std::to_string(c[i]));
  if (k_max < 1) throw ParameterError("relaxed: k_max must be >= 1");
}

double relaxation_budget(double c_i, double bmvdr_itf_error) {
  if (c_i < 0.0 || c_i > 1.0) throw ParameterError("relaxation budget: c must lie in [0, 1]");
  if (bmvdr_itf_error < 0.0) throw ParameterError("relaxation budget: reference error must be >= 0");
  return c_i * bmvdr_itf_error;
}

double tau_step(double tau_prev, double c, int k_max) {
  if (tau_prev < 0.0) throw ParameterError("tau step: tau must be >= 0");
  if (k_max < 1) throw ParameterError("tau step: k_max must be >= 1");
  double next = tau_prev - c / static_cast<double>(k_max);
  // the schedule visits integer multiples of c/k_max; anything closer to zero
  // than accumulated rounding noise is the endpoint
  if (std::abs(next) <= 1e-12 * std::max(1.0, c)) next = 0.0;
  return std::max(next, 0.0);
}

double itf_error(const lcmv::BinauralFilter& filter, const CVec& b, RefPair refs) {
  const cplx b_l = b[refs.left];
  const cplx b_r = b[refs.right];
  if (b_r == cplx(0.0, 0.0)) {
    log::warn("itf error: zero right-reference ATF entry, flagged as infinite");
    return std::numeric_limits<double>::infinity();
  }
  const cplx num = filter.left().dot(b);    // wL^H b
  const cplx den = filter.right().dot(b);   // wR^H b
  const double guard = 1e-14 * filter.w.norm() * b.norm();
  if (std::abs(den) <= guard) {
    log::warn("itf error: |wR^H b| below degeneracy guard, flagged as infinite");
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(num / den - b_l / b_r);
}

bool stopping_criterion(const RVec& errors, const RVec& budgets) {
  if (errors.size() != budgets.size())
    throw InvalidInputError("stopping criterion: list length mismatch");
  for (Eigen::Index i = 0; i < errors.size(); ++i)
    if (!(errors[i] <= budgets[i])) return false;
  return true;
}

RelaxedSolution relaxed_beamformer(const lcmv::BlockCpsd& p, const CVec& a,
                                   const std::vector<CVec>& interferers, RefPair refs,
                                   const RelaxationParams& params) {
  const int m = p.mics();
  const int n_int = static_cast<int>(interferers.size());
  params.validate(n_int);

  RelaxedSolution sol;
  sol.filter = lcmv::bmvdr(p, a, refs);
  sol.iterations_used = 0;

  // Budgets come from the BMVDR filter itself so the c = 1 criterion holds
  // with exact arithmetic at iteration zero.
  const RVec bmvdr_errors = all_itf_errors(sol.filter, interferers, refs);
  sol.budgets = RVec(n_int);
  for (int i = 0; i < n_int; ++i)
    sol.budgets[i] = relaxation_budget(params.c[i], bmvdr_errors[i]);

  const RVec slacked_budgets = sol.budgets.array() + kCriterionSlack;
  sol.final_errors = bmvdr_errors;
  if (stopping_criterion(sol.final_errors, slacked_budgets)) {
    sol.status = RelaxedStatus::kConvergedByCriterion;
    return sol;  // c = 1 (or error-free scene): the initialization is final
  }

  const bool all_zero_c = n_int > 0 && (params.c.array() == 0.0).all();
  if (all_zero_c) {
    // Strict constraints from the start: one JBLCMV solve, truncated like the
    // closed-form method when r exceeds 2M-3.
    const socp::SocpSolution strict = solve_strict(p, a, interferers, refs, params.solver);
    if (strict.status == socp::SocpStatus::kOptimal) {
      sol.filter = {strict.w, refs};
      sol.iterations_used = 1;
      sol.final_errors = all_itf_errors(sol.filter, interferers, refs);
      sol.status = stopping_criterion(sol.final_errors, slacked_budgets)
                       ? RelaxedStatus::kConvergedByCriterion
                       : RelaxedStatus::kExhaustedKmax;
    } else {
      sol.status = RelaxedStatus::kFallback;
      log::warn("relaxed: strict subproblem not solvable, returning BMVDR initialization");
    }
    return sol;
  }

  const int cap = std::max(2 * m - 3, 0);
  lcmv::BinauralFilter prev = sol.filter;
  for (int k = 1; k <= params.k_max; ++k) {
    const bool last = k == params.k_max;
    const int use_m = last ? std::min(n_int, cap) : n_int;
    std::vector<CVec> used(interferers.begin(), interferers.begin() + use_m);

    // bounds f_{2,i,(k)} = tau_i E_{i,BMVDR} |wR_{(k-1)}^H b_i| |b_iR|
    RVec bounds(use_m);
    for (int i = 0; i < use_m; ++i) {
      const double tau_i =
          params.c[i] * static_cast<double>(params.k_max - k) / static_cast<double>(params.k_max);
      const cplx wr_b = prev.right().dot(interferers[static_cast<std::size_t>(i)]);
      bounds[i] = tau_i * bmvdr_errors[i] *
                  std::abs(wr_b * interferers[static_cast<std::size_t>(i)][refs.right]);
    }

    socp::SocpSolution sub;
    try {
      const socp::SocpProblem prob = socp::lift_subproblem(p, a, used, refs, bounds);
      sub = socp::solve_socp(prob, params.solver);
    } catch (const DegenerateAtfError&) {
      sub.status = socp::SocpStatus::kInfeasible;
    }

    if (sub.status != socp::SocpStatus::kOptimal) {
      // The cone solver could not certify this subproblem (near-parallel
      // relative ATFs make low-frequency bins ill conditioned). Take the
      // final-iteration branch directly: the strict problem on the first
      // min(m, 2M-3) interferers always has a robust solution and satisfies
      // the criterion whenever m <= 2M-3.
      const socp::SocpSolution strict = solve_strict(p, a, interferers, refs, params.solver);
      if (strict.status == socp::SocpStatus::kOptimal) {
        sol.filter = {strict.w, refs};
        sol.iterations_used = k;
        sol.final_errors = all_itf_errors(sol.filter, interferers, refs);
        sol.status = stopping_criterion(sol.final_errors, slacked_budgets)
                         ? RelaxedStatus::kConvergedByCriterion
                         : RelaxedStatus::kExhaustedKmax;
        return sol;
      }
      // last resort: keep the previous iterate (BMVDR when k = 1)
      sol.filter = prev;
      sol.iterations_used = k - 1;
      sol.final_errors = all_itf_errors(sol.filter, interferers, refs);
      sol.status = RelaxedStatus::kFallback;
      log::warn("relaxed: strict endgame unsolvable, keeping the previous iterate");
      return sol;
    }

    lcmv::BinauralFilter candidate{sub.w, refs};
    sol.final_errors = all_itf_errors(candidate, interferers, refs);
    sol.filter = candidate;
    sol.iterations_used = k;
    if (stopping_criterion(sol.final_errors, slacked_budgets)) {
      sol.status = RelaxedStatus::kConvergedByCriterion;
      return sol;
    }
    prev = std::move(candidate);
  }
  sol.status = RelaxedStatus::kExhaustedKmax;
  return sol;
}

}  // namespace beamform::relaxed
