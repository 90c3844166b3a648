#include "quandary/common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace quandary {

namespace {

std::atomic<LogLevel> g_threshold{LogLevel::warning};
std::mutex g_mutex;

const char* label(LogLevel level)
{
    switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warning: return "warning";
    case LogLevel::error: return "error";
    }
    return "info";
}

}  // namespace

void log(LogLevel level, std::string_view message)
{
    if (level < g_threshold.load()) {
        return;
    }
    std::lock_guard lock(g_mutex);
    std::cerr << "[" << label(level) << "] " << message << '\n';
}

void set_log_threshold(LogLevel level) { g_threshold.store(level); }

}  // namespace quandary
