#include "misalign/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace misalign {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("MISALIGN_LOG");
    if (!env) return LogLevel::Warn;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    if (v == "warn") return LogLevel::Warn;
    if (v == "error") return LogLevel::Error;
    if (v == "off") return LogLevel::Off;
    return LogLevel::Warn;
}

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
        case LogLevel::Off: return "off";
    }
    return "?";
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

LogLevel log_level() {
    static LogLevel level = parse_level();
    return level;
}

void log(LogLevel level, std::string_view message) {
    if (level < log_level()) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[misalign " << level_tag(level) << "] " << message << '\n';
}

}  // namespace misalign
