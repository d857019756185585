// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

namespace beamform {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace beamform
