#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace xva {

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2 };

inline std::atomic<int>& log_level() {
    static std::atomic<int> level{static_cast<int>(LogLevel::Quiet)};
    return level;
}

inline void log_warn(std::string_view msg) {
    if (log_level().load() >= static_cast<int>(LogLevel::Warn))
        std::cerr << "warning: " << msg << '\n';
}

inline void log_info(std::string_view msg) {
    if (log_level().load() >= static_cast<int>(LogLevel::Info))
        std::cerr << "info: " << msg << '\n';
}

}  // namespace xva
