#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace monitord {

enum class LogLevel { off = 0, info = 1, trace = 2 };

// Level comes from MONITORD_LOG ({trace, info, off}); default is off so test
// output stays clean.
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("MONITORD_LOG");
    if (env == nullptr) return LogLevel::off;
    if (std::strcmp(env, "trace") == 0) return LogLevel::trace;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    return LogLevel::off;
  }();
  return level;
}

inline void log_line(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(log_level())) {
    std::fprintf(stderr, "[monitord] %s\n", msg.c_str());
  }
}

inline void log_info(const std::string& msg) { log_line(LogLevel::info, msg); }
inline void log_trace(const std::string& msg) { log_line(LogLevel::trace, msg); }

}  // namespace monitord
