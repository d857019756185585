// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "beamform/errors.hpp"
#include "beamform/fft.hpp"
#include "beamform/scene.hpp"
#include "beamform/stft.hpp"
#include "oracles.hpp"

using namespace beamform;

namespace {

scene::ArrayGeometry test_geometry() {
  scene::ArrayGeometry g;
  g.mic_positions = {{-0.08, 0.01, 0.0}, {-0.08, -0.01, 0.0}, {0.08, -0.01, 0.0}, {0.08, 0.01, 0.0}};
  g.refs = {0, 3};
  g.sample_rate = 16000.0;
  g.speed_of_sound = 343.0;
  return g;
}

double wrap(double x) { return std::remainder(x, 2.0 * kPi); }

}  // namespace

TEST_CASE("geometry invariants are enforced") {
  scene::ArrayGeometry g = test_geometry();
  CHECK_NOTHROW(g.validate());
  g.mic_positions.pop_back();
  CHECK_THROWS_AS(g.validate(), ConfigError);  // odd M
  g = test_geometry();
  g.refs = {2, 2};
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("source equidistant from both reference mics has unit ITF everywhere") {
  const scene::ArrayGeometry g = test_geometry();
  const auto atfs = scene::synthesize_freefield_atfs(g, {0.0, 0.8, 0.0}, 256);
  REQUIRE(static_cast<int>(atfs.size()) == 129);
  for (const CVec& a : atfs)
    CHECK(std::abs(a[g.refs.left] / a[g.refs.right] - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("DC bin of a free-field ATF is real and positive") {
  const scene::ArrayGeometry g = test_geometry();
  const auto atfs = scene::synthesize_freefield_atfs(g, {0.3, 0.5, 0.1}, 256);
  for (int j = 0; j < 4; ++j) {
    CHECK(atfs[0][j].imag() == 0.0);
    CHECK(atfs[0][j].real() > 0.0);
  }
}

TEST_CASE("free-field phase difference matches the analytic value and the delay oracle") {
  // two mics, distances 1.0 m and 1.1 m, bin at exactly 1 kHz
  scene::ArrayGeometry g;
  g.mic_positions = {{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}};
  g.refs = {0, 1};
  g.sample_rate = 16000.0;
  g.speed_of_sound = 343.0;
  const scene::Vec3 source{-1.0, 0.0, 0.0};  // d0 = 1.0, d1 = 1.1
  const int fft_size = 256;
  const int k1khz = 16;  // 16 * 16000 / 256 = 1000 Hz
  const auto atfs = scene::synthesize_freefield_atfs(g, source, fft_size);

  const double want = -2.0 * kPi * 1000.0 * 0.1 / 343.0;
  const double got = std::arg(atfs[k1khz][1] / atfs[k1khz][0]);
  CHECK(std::abs(wrap(got - want)) < 1e-12);

  // independent oracle: fractional-delay filters on an impulse, then a DFT.
  // A common 256-sample offset keeps the sinc tails inside the buffer and
  // cancels in the channel ratio.
  const double fs = g.sample_rate;
  const double offset = 256.0;
  const CVec spec0 =
      oracle::fractional_delay_spectrum(offset + 1.0 / 343.0 * fs, 1.0 / (4.0 * kPi * 1.0), 1024);
  const CVec spec1 =
      oracle::fractional_delay_spectrum(offset + 1.1 / 343.0 * fs, 1.0 / (4.0 * kPi * 1.1), 1024);
  const int k1024 = 64;  // 1 kHz on the 1024 grid
  const double oracle_phase = std::arg(spec1[k1024] / spec0[k1024]);
  CHECK(std::abs(wrap(oracle_phase - want)) < 1e-4);
}

TEST_CASE("free-field magnitude decreases with distance at every bin") {
  const scene::ArrayGeometry g = test_geometry();
  const auto near = scene::synthesize_freefield_atfs(g, {0.0, 0.5, 0.0}, 64);
  const auto far = scene::synthesize_freefield_atfs(g, {0.0, 0.9, 0.0}, 64);
  for (std::size_t k = 0; k < near.size(); ++k)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(near[k][j]) > std::abs(far[k][j]));
}

TEST_CASE("coincident source and microphone is a degenerate-geometry error") {
  const scene::ArrayGeometry g = test_geometry();
  CHECK_THROWS_AS(scene::synthesize_freefield_atfs(g, g.mic_positions[1], 64),
                  DegenerateGeometryError);
}

TEST_CASE("impulse-response ATFs: delta, shift and scaling behave like a DFT") {
  RMat irs = RMat::Zero(8, 3);
  irs(0, 0) = 1.0;  // delta
  irs(3, 1) = 1.0;  // delayed delta
  irs(0, 2) = 0.5;  // scaled delta
  const auto atfs = scene::atfs_from_impulse_responses(irs, 64);
  REQUIRE(static_cast<int>(atfs.size()) == 33);
  for (int k = 0; k < 33; ++k) {
    CHECK(std::abs(atfs[static_cast<std::size_t>(k)][0] - cplx(1.0, 0.0)) < 1e-12);
    // shift theorem: linear phase, unit magnitude
    const cplx want = std::polar(1.0, -2.0 * kPi * k * 3.0 / 64.0);
    CHECK(std::abs(atfs[static_cast<std::size_t>(k)][1] - want) < 1e-12);
    CHECK(std::abs(std::abs(atfs[static_cast<std::size_t>(k)][2]) - 0.5) < 1e-12);
  }
}

TEST_CASE("IR to ATF and back recovers the zero-padded IR") {
  oracle::Rng rng(11);
  RMat irs(40, 2);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) irs(i, j) = rng.gauss();
  const auto atfs = scene::atfs_from_impulse_responses(irs, 64);
  for (int j = 0; j < 2; ++j) {
    CVec spec(33);
    for (int k = 0; k < 33; ++k) spec[k] = atfs[static_cast<std::size_t>(k)][j];
    const RVec back = fft::irfft(spec, 64);
    CHECK((back.head(40) - irs.col(j)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(back.tail(24).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("empty impulse responses are rejected") {
  CHECK_THROWS_AS(scene::atfs_from_impulse_responses(RMat(), 64), InvalidInputError);
}

TEST_CASE("noise CPSD with no interferers is sigma^2 I") {
  const scene::NoiseCpsd n = scene::build_noise_cpsd({}, RVec(0), 0.25, 4);
  CHECK((n.p - 0.25 * CMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-one noise CPSD eigenvalues match the eigendecomposition oracle") {
  oracle::Rng rng(12);
  const CVec b = rng.cvec(4);
  const double sigma2 = 0.01;
  const scene::NoiseCpsd n = scene::build_noise_cpsd({b}, RVec::Constant(1, 1.0), sigma2);
  Eigen::SelfAdjointEigenSolver<CMat> eig(n.p);
  RVec want(4);
  want << sigma2, sigma2, sigma2, b.squaredNorm() + sigma2;
  CHECK((eig.eigenvalues() - want).cwiseAbs().maxCoeff() < 1e-12 * want.maxCoeff());
}

TEST_CASE("noise CPSD is Hermitian and positive definite") {
  oracle::Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CVec> bs;
    const int r = 1 + static_cast<int>(rng.uniform(0.0, 5.0));
    for (int i = 0; i < r; ++i) bs.push_back(rng.cvec(4));
    RVec psds(r);
    for (int i = 0; i < r; ++i) psds[i] = rng.uniform(0.1, 2.0);
    const double sigma2 = 1e-6;
    const scene::NoiseCpsd n = scene::build_noise_cpsd(bs, psds, sigma2);
    CHECK((n.p - n.p.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * n.p.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<CMat> eig(n.p);
    CHECK(eig.eigenvalues().minCoeff() >= sigma2 - 1e-10);
  }
}

TEST_CASE("non-positive noise floor is rejected") {
  CHECK_THROWS_AS(scene::build_noise_cpsd({}, RVec(0), 0.0, 4), InvalidNoiseFloorError);
  CHECK_THROWS_AS(scene::build_noise_cpsd({}, RVec(0), -1.0, 4), InvalidNoiseFloorError);
}

TEST_CASE("rendering a unit-impulse IR without noise is a pass-through") {
  scene::ArrayGeometry g = test_geometry();
  scene::SourceDescriptor src;
  src.kind = scene::SourceKind::kTarget;
  RMat irs = RMat::Zero(4, 4);
  for (int j = 0; j < 4; ++j) irs(0, j) = 1.0;
  src.impulse_responses = irs;
  oracle::Rng rng(14);
  RVec x(400);
  for (int i = 0; i < 400; ++i) x[i] = rng.gauss();
  const RMat out = scene::render_microphone_signals(g, {src}, {x}, {});
  for (int j = 0; j < 4; ++j) CHECK((out.col(j).head(400) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rendering is linear in the source waveforms with noise disabled") {
  scene::ArrayGeometry g = test_geometry();
  oracle::Rng rng(15);
  scene::SourceDescriptor s1, s2;
  s1.kind = scene::SourceKind::kTarget;
  s1.position = scene::Vec3{0.0, 0.8, 0.0};
  s2.kind = scene::SourceKind::kInterferer;
  s2.position = scene::Vec3{0.6, -0.3, 0.0};
  RVec x(300), u(300);
  for (int i = 0; i < 300; ++i) {
    x[i] = rng.gauss();
    u[i] = rng.gauss();
  }
  const RMat both = scene::render_microphone_signals(g, {s1, s2}, {x, u}, {});
  const RMat only_x = scene::render_microphone_signals(g, {s1}, {x}, {});
  const RMat only_u = scene::render_microphone_signals(g, {s2}, {u}, {});
  const Eigen::Index n = std::min({both.rows(), only_x.rows(), only_u.rows()});
  const double scale = both.cwiseAbs().maxCoeff();
  CHECK((both.topRows(n) - only_x.topRows(n) - only_u.topRows(n)).cwiseAbs().maxCoeff() <
        1e-12 * scale);
}

TEST_CASE("waveform length mismatch is rejected") {
  scene::ArrayGeometry g = test_geometry();
  scene::SourceDescriptor s1, s2;
  s1.kind = scene::SourceKind::kTarget;
  s1.position = scene::Vec3{0.0, 0.8, 0.0};
  s2 = s1;
  CHECK_THROWS_AS(
      scene::render_microphone_signals(g, {s1, s2}, {RVec::Ones(10), RVec::Ones(11)}, {}),
      InvalidInputError);
}

TEST_CASE("self-noise realization is reproducible from its seed") {
  scene::ArrayGeometry g = test_geometry();
  scene::SourceDescriptor s;
  s.kind = scene::SourceKind::kTarget;
  s.position = scene::Vec3{0.0, 0.8, 0.0};
  RVec x = RVec::Ones(200);
  scene::RenderOptions ro;
  ro.self_noise_sigma = 1e-3;
  ro.seed = 77;
  const RMat a = scene::render_microphone_signals(g, {s}, {x}, ro);
  const RMat b = scene::render_microphone_signals(g, {s}, {x}, ro);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  ro.seed = 78;
  const RMat c = scene::render_microphone_signals(g, {s}, {x}, ro);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rendered STFT tracks the frequency-domain model on high-energy bins") {
  // Slowly varying band-limited source through the free-field renderer vs the
  // per-bin model a(k) S(k, l). The product model only holds up to window-edge
  // leakage of order delay/frame_length, so the source sits close to the
  // array (propagation delays of a few samples).
  scene::ArrayGeometry g = test_geometry();
  // distance chosen so the array-center propagation delay is exactly 6 samples
  const double d_center = 6.0 * 343.0 / 16000.0;
  const scene::Vec3 pos{0.0, d_center, 0.0};
  stft::StftParams sp;

  oracle::Rng rng(16);
  RVec src_wave(16000);
  double state = 0.0;
  for (int i = 0; i < 16000; ++i) {  // low-passed noise, corner near 250 Hz
    state = 0.91 * state + 0.09 * rng.gauss();
    src_wave[i] = state;
  }
  scene::SourceDescriptor s;
  s.kind = scene::SourceKind::kTarget;
  s.position = pos;
  const RMat mic = scene::render_microphone_signals(g, {s}, {src_wave}, {});

  const auto atfs = scene::synthesize_freefield_atfs(g, pos, sp.fft_size);
  // The model reference S(k, l) is the source wavefront at the array center:
  // 48 samples of interpolator latency plus the 6-sample center delay. The
  // center phase it removes is restored on the model side below.
  RMat src_delayed = RMat::Zero(mic.rows(), 1);
  src_delayed.col(0).segment(48 + 6, src_wave.size()) = src_wave;
  const stft::TfTensor ym = stft::analyze(mic, sp);
  const stft::TfTensor xs = stft::analyze(src_delayed, sp);

  // per-bin relative error over frames, restricted to high-energy bins
  std::vector<double> num(static_cast<std::size_t>(sp.bins()), 0.0);
  std::vector<double> den(static_cast<std::size_t>(sp.bins()), 0.0);
  for (int l = 2; l < ym.frames() - 2; ++l) {
    for (int k = 1; k < sp.bins(); ++k) {
      const cplx center_phase = std::polar(1.0, 2.0 * kPi * k * 6.0 / sp.fft_size);
      for (int j = 0; j < 4; ++j) {
        const cplx model = atfs[static_cast<std::size_t>(k)][j] * center_phase * xs.at(l, k, 0);
        num[static_cast<std::size_t>(k)] += std::norm(ym.at(l, k, j) - model);
        den[static_cast<std::size_t>(k)] += std::norm(model);
      }
    }
  }
  const double peak = *std::max_element(den.begin(), den.end());
  int checked = 0;
  for (int k = 1; k < sp.bins(); ++k) {
    if (den[static_cast<std::size_t>(k)] < 0.05 * peak) continue;  // low-energy bin
    ++checked;
    CHECK(std::sqrt(num[static_cast<std::size_t>(k)] / den[static_cast<std::size_t>(k)]) <= 0.05);
  }
  CHECK(checked >= 5);
}
