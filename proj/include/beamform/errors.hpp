// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace beamform {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user-facing configuration (JSON config, STFT params, bands, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed inputs to an operation (shape mismatch, empty sequence, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Source coincides with a microphone or similar impossible geometry.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Noise floor sigma^2 <= 0 would make the disturbance CPSD singular.
class InvalidNoiseFloorError : public Error {
 public:
  using Error::Error;
};

/// Constraint matrix is rank deficient or over-determined.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// A reference-channel transfer function is (numerically) zero where a
/// division by it is required.
class DegenerateAtfError : public Error {
 public:
  using Error::Error;
};

/// Scalar parameter outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Aggregate has no admissible entries (e.g. every ratio denominator was
/// below the zero guard).
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

/// Filesystem/serialization failure, carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace beamform
