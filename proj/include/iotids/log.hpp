#pragma once

#include <cstdlib>
#include <iostream>
#include <string_view>

namespace iotids::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Threshold read once from IDS_LOG_LEVEL (error | info | debug); default info.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("IDS_LOG_LEVEL");
    if (!env) return Level::Info;
    const std::string_view v{env};
    if (v == "error") return Level::Error;
    if (v == "debug") return Level::Debug;
    return Level::Info;
  }();
  return level;
}

inline void write(Level level, std::string_view tag, std::string_view message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::cerr << '[' << tag << "] " << message << '\n';
}

inline void error(std::string_view m) { write(Level::Error, "error", m); }
inline void info(std::string_view m) { write(Level::Info, "info", m); }
inline void debug(std::string_view m) { write(Level::Debug, "debug", m); }

}  // namespace iotids::log
