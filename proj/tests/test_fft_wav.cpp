// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "beamform/errors.hpp"
#include "beamform/fft.hpp"
#include "beamform/wav.hpp"
#include "oracles.hpp"

using namespace beamform;

TEST_CASE("rfft matches the naive DFT") {
  oracle::Rng rng(1);
  for (int size : {8, 64, 256}) {
    RVec x(size);
    for (int i = 0; i < size; ++i) x[i] = rng.gauss();
    const CVec got = fft::rfft(x, size);
    const CVec want = oracle::naive_rdft(x, size);
    REQUIRE(got.size() == want.size());
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9 * want.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("rfft/irfft round trip is exact to machine precision") {
  oracle::Rng rng(2);
  RVec x(256);
  for (int i = 0; i < 256; ++i) x[i] = rng.gauss();
  const RVec back = fft::irfft(fft::rfft(x, 256), 256);
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rfft rejects non-power-of-two sizes") {
  RVec x = RVec::Zero(10);
  CHECK_THROWS_AS(fft::rfft(x, 100), InvalidInputError);
}

TEST_CASE("wav round trip preserves float samples and channel order") {
  oracle::Rng rng(3);
  wav::Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(500, 3);
  for (int i = 0; i < 500; ++i)
    for (int c = 0; c < 3; ++c) w.samples(i, c) = 0.5 * rng.gauss();
  const std::string path = (std::filesystem::temp_directory_path() / "bf_test_f32.wav").string();
  wav::write(path, w, "float32");
  const wav::Waveform r = wav::read(path);
  REQUIRE(r.channels() == 3);
  REQUIRE(r.frames() == 500);
  CHECK(r.sample_rate == 16000);
  CHECK((r.samples - w.samples.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("wav pcm16 round trip is exact to one quantization step") {
  oracle::Rng rng(4);
  wav::Waveform w;
  w.sample_rate = 8000;
  w.samples.resize(200, 1);
  for (int i = 0; i < 200; ++i) w.samples(i, 0) = 0.9 * std::sin(0.01 * i);
  const std::string path = (std::filesystem::temp_directory_path() / "bf_test_i16.wav").string();
  wav::write(path, w, "pcm16");
  const wav::Waveform r = wav::read(path);
  REQUIRE(r.frames() == 200);
  // one rounding step plus the 32767/32768 scale asymmetry
  CHECK((r.samples - w.samples).cwiseAbs().maxCoeff() < 1.0 / 16384.0);
  std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects garbage") {
  const std::string path = (std::filesystem::temp_directory_path() / "bf_test_bad.wav").string();
  {
    std::ofstream os(path, std::ios::binary);
    os << "definitely not a wav file, not even close to one....";
  }
  CHECK_THROWS_AS(wav::read(path), IoError);
  std::filesystem::remove(path);
}
