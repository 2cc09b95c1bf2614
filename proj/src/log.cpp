#include "qamro/log.hpp"

#include <cctype>
#include <cstdlib>
#include <iostream>

namespace qamro {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("QAMRO_LOG_LEVEL");
  if (env == nullptr) return LogLevel::kInfo;
  std::string v(env);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "quiet" || v == "error" || v == "0") return LogLevel::kQuiet;
  if (v == "debug" || v == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "[qamro] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug)
    std::cerr << "[qamro:debug] " << msg << "\n";
}

}  // namespace qamro
