#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankone {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u32 = std::uint32_t;

// Error taxonomy. Everything derives from rankone::error so callers can
// catch the whole family at the CLI boundary.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// spacer vector does not match the declared cut count
struct shape_error : error { using error::error; };
// cuts < 2 or otherwise malformed stage
struct invalid_stage_error : error { using error::error; };
// stage / tower index out of range
struct range_error : error { using error::error; };
// checked 64-bit arithmetic overflowed
struct overflow_error : error { using error::error; };
// |m| exceeds the truncation window
struct window_error : error { using error::error; };
// recipe parameters violate their preconditions
struct parameter_error : error { using error::error; };
// brute-force oracle asked to unroll past its scale limit
struct oracle_scale_error : error { using error::error; };

struct resource_error : error {
    u64 required;
    resource_error(const std::string& what, u64 required_count)
        : error(what), required(required_count) {}
};

struct degenerate_family_error : error {
    std::vector<std::string> dependent_columns;
    degenerate_family_error(const std::string& what, std::vector<std::string> cols)
        : error(what), dependent_columns(std::move(cols)) {}
};

inline u64 checked_add(u64 a, u64 b) {
    u64 r;
    if (__builtin_add_overflow(a, b, &r))
        throw overflow_error("u64 addition overflow: " + std::to_string(a) + " + " + std::to_string(b));
    return r;
}

inline u64 checked_mul(u64 a, u64 b) {
    u64 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw overflow_error("u64 multiplication overflow: " + std::to_string(a) + " * " + std::to_string(b));
    return r;
}

inline u64 checked_sub(u64 a, u64 b) {
    if (b > a)
        throw overflow_error("u64 subtraction underflow: " + std::to_string(a) + " - " + std::to_string(b));
    return a - b;
}

// Exact nonnegative rational. Denominators are tower sizes (h_J + 1) or
// small products thereof; everything stays within u64 via checked ops.
struct Rational {
    u64 num = 0;
    u64 den = 1;

    Rational() = default;
    Rational(u64 n, u64 d) : num(n), den(d) {
        if (den == 0) throw error("rational with zero denominator");
        reduce();
    }

    void reduce() {
        const u64 g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    // exact comparisons via 128-bit cross multiplication
    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num) * b.den ==
               static_cast<unsigned __int128>(b.num) * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num) * b.den <
               static_cast<unsigned __int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

    Rational operator+(const Rational& o) const {
        if (den == o.den) return Rational(checked_add(num, o.num), den);
        const u64 g = std::gcd(den, o.den);
        const u64 d = checked_mul(den / g, o.den);
        return Rational(checked_add(checked_mul(num, o.den / g), checked_mul(o.num, den / g)), d);
    }
    Rational operator*(const Rational& o) const {
        const u64 g1 = std::gcd(num, o.den);
        const u64 g2 = std::gcd(o.num, den);
        return Rational(checked_mul(num / g1, o.num / g2),
                        checked_mul(den / g2, o.den / g1));
    }
    // |a - b| as an exact rational
    Rational abs_diff(const Rational& o) const {
        const u64 g = std::gcd(den, o.den);
        const u64 d = checked_mul(den / g, o.den);
        const u64 lhs = checked_mul(num, o.den / g);
        const u64 rhs = checked_mul(o.num, den / g);
        return Rational(lhs > rhs ? lhs - rhs : rhs - lhs, d);
    }
};

// Signed rational for centered quantities (covariances).
struct SignedRational {
    i64 num = 0;
    u64 den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Build num/den from 128-bit intermediates, reducing first; exactness is
// kept as long as the reduced fraction fits in 64 bits.
inline Rational rational_from_128(unsigned __int128 num, unsigned __int128 den) {
    if (den == 0) throw error("rational with zero denominator");
    unsigned __int128 a = num, b = den;
    while (b) {
        const unsigned __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) { num /= a; den /= a; }
    const unsigned __int128 max64 = ~u64{0};
    if (num > max64 || den > max64)
        throw overflow_error("exact rational does not fit in 64 bits after reduction");
    return Rational(static_cast<u64>(num), static_cast<u64>(den));
}

} // namespace rankone
