// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "beamform/types.hpp"

namespace beamform::fft {

/// True if n is a power of two (n >= 1).
bool is_pow2(std::size_t n);

/// In-place radix-2 complex FFT. size must be a power of two.
/// inverse = true applies the unscaled inverse transform; callers divide by n.
void transform(std::vector<cplx>& data, bool inverse);

/// One-sided DFT of a real signal zero-padded/truncated to fft_size samples.
/// Returns fft_size/2 + 1 bins. fft_size must be a power of two >= 2.
CVec rfft(const RVec& x, int fft_size);

/// Inverse of rfft: reconstructs fft_size real samples from fft_size/2 + 1
/// one-sided bins by conjugate symmetry.
RVec irfft(const CVec& spectrum, int fft_size);

}  // namespace beamform::fft
