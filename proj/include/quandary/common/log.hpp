#pragma once

#include <string_view>

namespace quandary {

enum class LogLevel { debug, info, warning, error };

/// Plain stderr logging. Messages below the threshold are dropped.
void log(LogLevel level, std::string_view message);
void set_log_threshold(LogLevel level);

}  // namespace quandary
