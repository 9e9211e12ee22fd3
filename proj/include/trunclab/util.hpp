#pragma once
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <system_error>

#include "trunclab/errors.hpp"

namespace trunclab {

// Shortest decimal string that parses back to the identical double bits.
inline std::string double_to_exact_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double double_from_exact_string(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError("not a decimal float literal: '" + s + "'");
    return v;
}

// Fixed 17-significant-digit format for CSV float columns.
inline std::string double_to_csv(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Two-term compensated accumulator. Adding terms in a fixed order makes
// the (value, comp) pair reproducible bit for bit.
struct Kahan {
    double value = 0.0;
    double comp = 0.0;

    void add(double term) {
        double y = term - comp;
        double t = value + y;
        comp = (t - value) - y;
        value = t;
    }
};

inline int64_t isqrt64(int64_t n) {
    if (n < 0) return 0;
    auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

} // namespace trunclab
