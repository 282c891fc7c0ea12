#pragma once

#include <string>

namespace asp {

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from ASP_LOG_LEVEL (error|warn|info|debug) on first use;
// default warn. Messages go to stderr so artifacts on stdout stay clean.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& message) { log_message(LogLevel::Error, message); }
inline void log_warn(const std::string& message) { log_message(LogLevel::Warn, message); }
inline void log_info(const std::string& message) { log_message(LogLevel::Info, message); }
inline void log_debug(const std::string& message) { log_message(LogLevel::Debug, message); }

}  // namespace asp
