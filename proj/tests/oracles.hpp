// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Test-only oracles, all independent of the implementation paths they check.

#pragma once

#include <random>
#include <vector>

#include "beamform/lcmv.hpp"
#include "beamform/types.hpp"

namespace beamform::oracle {

// O(n^2) DFT, one-sided
inline CVec naive_rdft(const RVec& x, int fft_size) {
  CVec out(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) {
    cplx acc(0.0, 0.0);
    for (int n = 0; n < std::min<int>(fft_size, static_cast<int>(x.size())); ++n)
      acc += x[n] * std::polar(1.0, -2.0 * kPi * k * n / static_cast<double>(fft_size));
    out[k] = acc;
  }
  return out;
}

// ideal fractional delay realized by a long windowed sinc, then DFT'd
inline CVec fractional_delay_spectrum(double delay_samples, double gain, int fft_size) {
  const int half = 256;
  RVec h = RVec::Zero(fft_size);
  for (int n = 0; n < fft_size; ++n) {
    const double x = n - delay_samples;
    if (std::abs(x) >= half) continue;
    const double wnd = 0.5 * (1.0 + std::cos(kPi * x / half));
    h[n] = gain * (std::abs(x) < 1e-12 ? wnd : wnd * std::sin(kPi * x) / (kPi * x));
  }
  return naive_rdft(h, fft_size);
}

// dense KKT saddle-point solve of min w^H Ptilde w s.t. Lambda^H w = f:
//   [2 Ptilde, Lambda; Lambda^H, 0] [w; nu] = [0; f]
inline CVec kkt_gblcmv(const CMat& p_tilde, const CMat& lambda, const CVec& f) {
  const int n = static_cast<int>(p_tilde.rows());
  const int d = static_cast<int>(lambda.cols());
  CMat kkt = CMat::Zero(n + d, n + d);
  kkt.topLeftCorner(n, n) = 2.0 * p_tilde;
  kkt.topRightCorner(n, d) = lambda;
  kkt.bottomLeftCorner(d, n) = lambda.adjoint();
  CVec rhs = CVec::Zero(n + d);
  rhs.tail(d) = f;
  const CVec sol = kkt.fullPivLu().solve(rhs);
  return sol.head(n);
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(engine()) / 18446744073709551616.0);
  }
  double gauss() {
    const double u1 = (static_cast<double>(engine()) + 1.0) / 18446744073709551616.0;
    const double u2 = (static_cast<double>(engine()) + 1.0) / 18446744073709551616.0;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  cplx cgauss() { return {gauss(), gauss()}; }
  CVec cvec(int n) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v[i] = cgauss();
    return v;
  }
};

// Hermitian PD matrix with eigenvalues in [lo, hi]
inline CMat random_cpsd(Rng& rng, int m, double lo = 0.05, double hi = 2.0) {
  CMat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = rng.cgauss();
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  RVec eig(m);
  for (int i = 0; i < m; ++i) eig[i] = rng.uniform(lo, hi);
  CMat p = q * eig.asDiagonal() * q.adjoint();
  return 0.5 * (p + p.adjoint());
}

// ATF-style vector: unit-magnitude phases with mild gain spread, safe refs
inline CVec random_atf(Rng& rng, int m) {
  CVec v(m);
  for (int i = 0; i < m; ++i) v[i] = std::polar(rng.uniform(0.5, 1.5), rng.uniform(-kPi, kPi));
  return v;
}

struct RandomScene {
  CMat p;                    // noise CPSD
  CVec a;                    // target ATF
  std::vector<CVec> b;       // interferer ATFs
};

inline RandomScene random_scene(Rng& rng, int m, int interferers) {
  RandomScene s;
  s.a = random_atf(rng, m);
  for (int i = 0; i < interferers; ++i) s.b.push_back(random_atf(rng, m));
  // disturbance made of the interferers plus a noise floor, like the model
  CMat p = 0.05 * random_cpsd(rng, m, 0.2, 1.0);
  for (const CVec& b : s.b) p += rng.uniform(0.3, 1.0) * b * b.adjoint();
  s.p = 0.5 * (p + p.adjoint());
  return s;
}

}  // namespace beamform::oracle
