// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace beamform {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Reference-microphone pair. Convention: left reference is the first
/// microphone of the left device, right reference the last microphone of the
/// right device, but any distinct pair of channel indices is accepted.
struct RefPair {
  int left = 0;
  int right = 0;
};

}  // namespace beamform
