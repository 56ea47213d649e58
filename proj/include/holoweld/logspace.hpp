#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace holoweld {

/// Signed log-space scalar: represents sign * exp(lg). The growth bounds in
/// the inductive construction are double exponentials, so every such bound is
/// carried as (sign, log magnitude) and never exponentiated.
struct LogScalar {
    int sign = 0;      // -1, 0, +1
    double lg = -std::numeric_limits<double>::infinity();

    static LogScalar zero() { return {0, -std::numeric_limits<double>::infinity()}; }

    static LogScalar from_value(double v) {
        if (v == 0.0) return zero();
        return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
    }

    /// exp(x) as a LogScalar, valid for any finite x (including x ~ 1e300).
    static LogScalar exp_of(double x) { return {1, x}; }

    static LogScalar from_log(int sign, double lg) { return {sign, lg}; }

    bool is_zero() const { return sign == 0; }

    /// The plain value; +/-inf when the magnitude overflows a double.
    double value() const {
        if (sign == 0) return 0.0;
        return sign * std::exp(lg);
    }

    LogScalar operator*(const LogScalar& o) const {
        if (sign == 0 || o.sign == 0) return zero();
        return {sign * o.sign, lg + o.lg};
    }

    LogScalar operator+(const LogScalar& o) const {
        if (sign == 0) return o;
        if (o.sign == 0) return *this;
        const auto& big = lg >= o.lg ? *this : o;
        const auto& small = lg >= o.lg ? o : *this;
        const double d = small.lg - big.lg; // <= 0
        if (sign == o.sign) return {sign, big.lg + std::log1p(std::exp(d))};
        const double m = 1.0 - std::exp(d);
        if (m == 0.0) return zero();
        return {big.sign, big.lg + std::log(m)};
    }

    LogScalar operator-() const { return {-sign, lg}; }
    LogScalar operator-(const LogScalar& o) const { return *this + (-o); }

    /// Three-way compare of the signed values.
    int compare(const LogScalar& o) const {
        if (sign != o.sign) return sign < o.sign ? -1 : 1;
        if (sign == 0) return 0;
        if (lg == o.lg) return 0;
        const bool less = (lg < o.lg) == (sign > 0);
        return less ? -1 : 1;
    }
    bool operator<(const LogScalar& o) const { return compare(o) < 0; }
    bool operator<=(const LogScalar& o) const { return compare(o) <= 0; }
};

inline std::ostream& operator<<(std::ostream& os, const LogScalar& s) {
    if (s.sign == 0) return os << "0";
    return os << (s.sign < 0 ? "-" : "") << "exp(" << s.lg << ")";
}

} // namespace holoweld
