// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/fft.hpp"

#include <cmath>

#include "beamform/errors.hpp"

namespace beamform::fft {

bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

void transform(std::vector<cplx>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_pow2(n)) throw InvalidInputError("fft: size must be a power of two");
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = data[i + k];
        const cplx v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

CVec rfft(const RVec& x, int fft_size) {
  if (fft_size < 2 || !is_pow2(static_cast<std::size_t>(fft_size)))
    throw InvalidInputError("rfft: fft_size must be a power of two >= 2");
  std::vector<cplx> buf(static_cast<std::size_t>(fft_size), cplx(0.0, 0.0));
  const int ncopy = std::min<int>(fft_size, static_cast<int>(x.size()));
  for (int i = 0; i < ncopy; ++i) buf[static_cast<std::size_t>(i)] = cplx(x[i], 0.0);
  transform(buf, false);
  CVec out(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) out[k] = buf[static_cast<std::size_t>(k)];
  return out;
}

RVec irfft(const CVec& spectrum, int fft_size) {
  if (fft_size < 2 || !is_pow2(static_cast<std::size_t>(fft_size)))
    throw InvalidInputError("irfft: fft_size must be a power of two >= 2");
  if (spectrum.size() != fft_size / 2 + 1)
    throw InvalidInputError("irfft: spectrum has wrong bin count");
  std::vector<cplx> buf(static_cast<std::size_t>(fft_size));
  for (int k = 0; k <= fft_size / 2; ++k) buf[static_cast<std::size_t>(k)] = spectrum[k];
  for (int k = 1; k < fft_size / 2; ++k)
    buf[static_cast<std::size_t>(fft_size - k)] = std::conj(spectrum[k]);
  transform(buf, true);
  RVec out(fft_size);
  const double scale = 1.0 / static_cast<double>(fft_size);
  for (int i = 0; i < fft_size; ++i) out[i] = buf[static_cast<std::size_t>(i)].real() * scale;
  return out;
}

}  // namespace beamform::fft
