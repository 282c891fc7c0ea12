#include "asp/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace asp {

namespace {

LogLevel parse_level(const char* text) {
    if (!text) return LogLevel::Warn;
    const std::string value(text);
    if (value == "error") return LogLevel::Error;
    if (value == "warn") return LogLevel::Warn;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

LogLevel& current_level() {
    static LogLevel level = parse_level(std::getenv("ASP_LOG_LEVEL"));
    return level;
}

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Error: return "error";
        case LogLevel::Warn: return "warn";
        case LogLevel::Info: return "info";
        case LogLevel::Debug: return "debug";
    }
    return "?";
}

}  // namespace

LogLevel log_level() { return current_level(); }

void set_log_level(LogLevel level) { current_level() = level; }

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(current_level())) return;
    static std::mutex mutex;  // grid workers may log concurrently
    const std::lock_guard<std::mutex> lock(mutex);
    std::cerr << "[asp " << level_name(level) << "] " << message << '\n';
}

}  // namespace asp
