#pragma once

#include <cstdint>

#include "hopflink/rational.hpp"

namespace hopflink {

/// Integer square root, exact: largest r with r*r <= n.
inline std::int64_t isqrt(std::int64_t n) {
    if (n < 0) throw overflow_error("isqrt of negative");
    if (n < 2) return n;
    std::int64_t r = static_cast<std::int64_t>(__builtin_sqrt(static_cast<double>(n)));
    while (r > 0 && checked_mul(r, r) > n) --r;
    while (checked_mul(r + 1, r + 1) <= n) ++r;
    return r;
}

/// Smallest integer r with r*r >= n.
inline std::int64_t isqrt_ceil(std::int64_t n) {
    std::int64_t r = isqrt(n);
    return r * r == n ? r : r + 1;
}

// Square roots enter all cost bounds; they are handled as exact rational
// enclosures of width <= 2^-10 so every bound check is a decidable rational
// comparison (no float nondeterminism in certification).
inline constexpr std::int64_t kRootScale = 1 << 10;

/// Rational upper enclosure: smallest multiple of 2^-10 that is >= sqrt(x).
inline Rat sqrt_upper(const Rat& x) {
    if (x.is_negative()) throw overflow_error("sqrt of negative");
    // sqrt(p/q) <= m/S  <=>  p*S^2 <= m^2*q ; find minimal such m.
    std::int64_t p = x.num(), q = x.den();
    __int128 lhs = static_cast<__int128>(p) * kRootScale * kRootScale;
    // start from a float guess, then correct exactly
    double guess = __builtin_sqrt(x.to_double()) * kRootScale;
    std::int64_t m = static_cast<std::int64_t>(guess);
    auto ok = [&](std::int64_t mm) { return static_cast<__int128>(mm) * mm * q >= lhs; };
    while (m > 0 && ok(m - 1)) --m;
    while (!ok(m)) ++m;
    return Rat(m, kRootScale);
}

/// Rational lower enclosure: largest multiple of 2^-10 that is <= sqrt(x).
inline Rat sqrt_lower(const Rat& x) {
    if (x.is_negative()) throw overflow_error("sqrt of negative");
    std::int64_t p = x.num(), q = x.den();
    __int128 lhs = static_cast<__int128>(p) * kRootScale * kRootScale;
    double guess = __builtin_sqrt(x.to_double()) * kRootScale;
    std::int64_t m = static_cast<std::int64_t>(guess) + 1;
    auto ok = [&](std::int64_t mm) { return static_cast<__int128>(mm) * mm * q <= lhs; };
    while (m > 0 && !ok(m)) --m;
    while (ok(m + 1)) ++m;
    return Rat(m, kRootScale);
}

} // namespace hopflink
