// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include "beamform/errors.hpp"
#include "beamform/relaxed.hpp"
#include "oracles.hpp"

using namespace beamform;

namespace {
const RefPair kRefs{0, 3};

relaxed::RelaxationParams uniform_params(int m, double c, int k_max) {
  relaxed::RelaxationParams p;
  p.c = RVec::Constant(m, c);
  p.k_max = k_max;
  return p;
}
}  // namespace

TEST_CASE("relaxation budget arithmetic") {
  CHECK(relaxed::relaxation_budget(0.0, 0.7) == 0.0);
  CHECK(relaxed::relaxation_budget(1.0, 0.7) == 0.7);
  CHECK(relaxed::relaxation_budget(0.3, 0.5) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK_THROWS_AS(relaxed::relaxation_budget(1.2, 0.5), ParameterError);
  CHECK_THROWS_AS(relaxed::relaxation_budget(-0.1, 0.5), ParameterError);
}

TEST_CASE("tau schedule: start, step and exact zero endpoint") {
  const double c = 0.3;
  const int k_max = 10;
  double tau = c;  // tau_(0) = c
  CHECK(relaxed::tau_step(tau, c, k_max) == doctest::Approx(0.27).epsilon(1e-12));
  for (int k = 0; k < k_max; ++k) tau = relaxed::tau_step(tau, c, k_max);
  CHECK(tau == 0.0);  // exactly zero after k_max steps
  CHECK(relaxed::tau_step(0.0, c, k_max) == 0.0);  // floored
}

TEST_CASE("tau sequence is strictly decreasing by alpha until the floor") {
  const double c = 0.77;
  const int k_max = 7;
  double tau = c;
  for (int k = 0; k < k_max; ++k) {
    const double next = relaxed::tau_step(tau, c, k_max);
    CHECK(next < tau);
    if (next > 0.0) CHECK(std::abs((tau - next) - c / k_max) < 1e-12);
    tau = next;
  }
  CHECK(tau == 0.0);
}

TEST_CASE("itf error matches a direct complex-arithmetic oracle") {
  oracle::Rng rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    lcmv::BinauralFilter f;
    f.w = rng.cvec(8);
    f.refs = kRefs;
    const CVec b = oracle::random_atf(rng, 4);
    // independent evaluation
    cplx num(0, 0), den(0, 0);
    for (int j = 0; j < 4; ++j) {
      num += std::conj(f.w[j]) * b[j];
      den += std::conj(f.w[4 + j]) * b[j];
    }
    const double want = std::abs(num / den - b[kRefs.left] / b[kRefs.right]);
    CHECK(std::abs(relaxed::itf_error(f, b, kRefs) - want) < 1e-12 * (1.0 + want));
  }
}

TEST_CASE("itf error flags a degenerate denominator as infinite") {
  lcmv::BinauralFilter f;
  f.w = CVec::Zero(8);
  f.w[0] = cplx(1.0, 0.0);  // left nonzero, right filter zero
  f.refs = kRefs;
  oracle::Rng rng(82);
  const CVec b = oracle::random_atf(rng, 4);
  CHECK(std::isinf(relaxed::itf_error(f, b, kRefs)));
}

TEST_CASE("stopping criterion compares errors against budgets elementwise") {
  RVec errors(3), budgets(3);
  errors << 0.0, 0.0, 0.0;
  budgets << 0.0, 0.1, 0.2;
  CHECK(relaxed::stopping_criterion(errors, budgets));
  errors << 0.05, 0.1, 0.2 + 1e-6;
  CHECK_FALSE(relaxed::stopping_criterion(errors, budgets));
  CHECK_THROWS_AS(relaxed::stopping_criterion(RVec(2), RVec(3)), InvalidInputError);
}

TEST_CASE("c = 1 returns the BMVDR initialization bit for bit with zero iterations") {
  oracle::Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::RandomScene sc = oracle::random_scene(rng, 4, 4);
    const auto block = lcmv::BlockCpsd::from_noise(sc.p);
    const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs,
                                                 uniform_params(4, 1.0, 10));
    const auto w_bmvdr = lcmv::bmvdr(block, sc.a, kRefs);
    CHECK(sol.iterations_used == 0);
    CHECK(sol.status == relaxed::RelaxedStatus::kConvergedByCriterion);
    CHECK((sol.filter.w - w_bmvdr.w).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("c = 0 with m <= 2M - 3 returns the JBLCMV filter") {
  oracle::Rng rng(84);
  for (int trial = 0; trial < 10; ++trial) {
    const int n_int = 1 + static_cast<int>(rng.uniform(0.0, 4.99));  // 1..5
    const oracle::RandomScene sc = oracle::random_scene(rng, 4, n_int);
    const auto block = lcmv::BlockCpsd::from_noise(sc.p);
    const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs,
                                                 uniform_params(n_int, 0.0, 10));
    const auto w_jblcmv =
        lcmv::solve_gblcmv(block, lcmv::jblcmv_constraints(sc.a, sc.b, kRefs), kRefs);
    CHECK(sol.status == relaxed::RelaxedStatus::kConvergedByCriterion);
    CHECK((sol.filter.w - w_jblcmv.w).cwiseAbs().maxCoeff() <=
          1e-6 * (1.0 + w_jblcmv.w.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("theorem guarantees: budgets, sandwich, termination for m <= 2M - 3") {
  oracle::Rng rng(85);
  for (int trial = 0; trial < 25; ++trial) {
    const int n_int = 1 + static_cast<int>(rng.uniform(0.0, 4.99));
    const double c = rng.uniform(0.1, 0.9);
    const int k_max = trial % 2 == 0 ? 10 : 50;
    const oracle::RandomScene sc = oracle::random_scene(rng, 4, n_int);
    const auto block = lcmv::BlockCpsd::from_noise(sc.p);
    const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs,
                                                 uniform_params(n_int, c, k_max));
    CHECK(sol.iterations_used <= k_max);
    CHECK(sol.status == relaxed::RelaxedStatus::kConvergedByCriterion);
    // error bound Eq-43 style, with the documented solver slack
    for (int i = 0; i < n_int; ++i) CHECK(sol.final_errors[i] <= sol.budgets[i] + 1e-8);
    // noise-power sandwich Eq-44 style
    const auto w_bmvdr = lcmv::bmvdr(block, sc.a, kRefs);
    const auto w_jblcmv =
        lcmv::solve_gblcmv(block, lcmv::jblcmv_constraints(sc.a, sc.b, kRefs), kRefs);
    const double o = block.quad(sol.filter.w);
    CHECK(o >= block.quad(w_bmvdr.w) * (1.0 - 1e-6));
    CHECK(o <= block.quad(w_jblcmv.w) * (1.0 + 1e-6));
    // target distortionless constraints hold
    const auto cs1 = lcmv::target_constraints(sc.a, kRefs);
    CHECK(lcmv::constraint_residual(cs1, sol.filter.w) <= 1e-8 * (1.0 + cs1.f.norm()));
  }
}

TEST_CASE("m beyond 2M - 3 still terminates within k_max") {
  oracle::Rng rng(86);
  for (int trial = 0; trial < 6; ++trial) {
    const int n_int = 6 + trial % 2;  // 6 or 7 > 2M - 3 = 5
    const double c = rng.uniform(0.2, 0.8);
    const oracle::RandomScene sc = oracle::random_scene(rng, 4, n_int);
    const auto block = lcmv::BlockCpsd::from_noise(sc.p);
    const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs,
                                                 uniform_params(n_int, c, 10));
    CHECK(sol.iterations_used <= 10);
    // no guarantee of criterion satisfaction here, but outputs stay total
    CHECK(sol.filter.w.allFinite());
  }
}

TEST_CASE("params validation rejects malformed inputs") {
  oracle::Rng rng(87);
  const oracle::RandomScene sc = oracle::random_scene(rng, 4, 2);
  const auto block = lcmv::BlockCpsd::from_noise(sc.p);
  relaxed::RelaxationParams p = uniform_params(2, 0.5, 10);
  p.k_max = 0;
  CHECK_THROWS_AS(relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs, p), ParameterError);
  p = uniform_params(2, 1.5, 10);
  CHECK_THROWS_AS(relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs, p), ParameterError);
  p = uniform_params(3, 0.5, 10);  // wrong arity
  CHECK_THROWS_AS(relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs, p), ParameterError);
}

TEST_CASE("no interferers means the initialization satisfies the criterion vacuously") {
  oracle::Rng rng(88);
  const oracle::RandomScene sc = oracle::random_scene(rng, 4, 0);
  const auto block = lcmv::BlockCpsd::from_noise(sc.p);
  const auto sol =
      relaxed::relaxed_beamformer(block, sc.a, {}, kRefs, uniform_params(0, 0.5, 10));
  CHECK(sol.iterations_used == 0);
  CHECK(sol.status == relaxed::RelaxedStatus::kConvergedByCriterion);
}

TEST_CASE("per-interferer trade-offs allow mixing strict and loose budgets") {
  oracle::Rng rng(89);
  const oracle::RandomScene sc = oracle::random_scene(rng, 4, 2);
  const auto block = lcmv::BlockCpsd::from_noise(sc.p);
  relaxed::RelaxationParams p;
  p.c = RVec(2);
  p.c << 0.0, 1.0;  // pin the first interferer, let the second collapse
  p.k_max = 20;
  const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs, p);
  CHECK(sol.status == relaxed::RelaxedStatus::kConvergedByCriterion);
  CHECK(sol.final_errors[0] <= 1e-8);
  CHECK(sol.final_errors[1] <= sol.budgets[1] + 1e-8);
}

TEST_CASE("iterates between the endpoints cost more noise as budgets shrink") {
  // property-style check of the trade-off direction on one scene
  oracle::Rng rng(90);
  const oracle::RandomScene sc = oracle::random_scene(rng, 4, 3);
  const auto block = lcmv::BlockCpsd::from_noise(sc.p);
  double prev_obj = -1.0;
  for (double c : {0.9, 0.5, 0.1}) {
    const auto sol = relaxed::relaxed_beamformer(block, sc.a, sc.b, kRefs,
                                                 uniform_params(3, c, 50));
    const double obj = block.quad(sol.filter.w);
    CHECK(obj >= prev_obj * (1.0 - 1e-9));  // smaller budgets never cost less noise
    prev_obj = obj;
  }
}
