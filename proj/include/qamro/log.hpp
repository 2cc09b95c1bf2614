#pragma once

#include <string>

namespace qamro {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Parsed once from QAMRO_LOG_LEVEL (quiet|info|debug, default info).
LogLevel log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace qamro
