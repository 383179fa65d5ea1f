#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace ppm {

enum class LogLevel { quiet = 0, warning = 1, info = 2 };

inline std::atomic<int>& log_level_storage()
{
    static std::atomic<int> level{static_cast<int>(LogLevel::warning)};
    return level;
}

inline void set_log_level(LogLevel level) { log_level_storage() = static_cast<int>(level); }

inline void log_message(LogLevel level, std::string_view tag, std::string_view msg)
{
    if (static_cast<int>(level) > log_level_storage().load())
        return;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    std::cerr << "[ppm] " << tag << ": " << msg << '\n';
}

inline void log_warning(std::string_view msg) { log_message(LogLevel::warning, "warning", msg); }
inline void log_info(std::string_view msg) { log_message(LogLevel::info, "info", msg); }

} // namespace ppm
