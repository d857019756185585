// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <string>

namespace beamform::log {

enum class Level { kDebug, kInfo, kWarn, kError };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide log sink. Default sink writes to stderr.
/// Passing an empty function restores the default.
void set_sink(Sink sink);

void emit(Level level, const std::string& msg);

inline void warn(const std::string& msg) { emit(Level::kWarn, msg); }
inline void info(const std::string& msg) { emit(Level::kInfo, msg); }

}  // namespace beamform::log
