#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>

namespace ppm {

// Shortest representation that parses back to the same double.
inline std::string format_double(double x)
{
    if (std::isnan(x))
        return "NA";
    if (std::isinf(x))
        return x > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Fixed number of significant digits (17 round-trips any double).
inline std::string format_double(double x, int significant)
{
    if (std::isnan(x))
        return "NA";
    if (std::isinf(x))
        return x > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, significant);
    return std::string(buf, res.ptr);
}

inline std::string format_double(const std::optional<double>& x)
{
    return x ? format_double(*x) : std::string("NA");
}

} // namespace ppm
