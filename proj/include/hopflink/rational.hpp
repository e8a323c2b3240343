#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hopflink {

// Arithmetic beyond 64 bits is an engine bug, not a user error: every quantity
// the engine manipulates (degrees, sizes, costs) is polynomially bounded by
// the input scale.
struct overflow_error : std::runtime_error {
    explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::int64_t checked_cast(__int128 v, const char* op) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw overflow_error(std::string("integer overflow in ") + op);
    return static_cast<std::int64_t>(v);
}

} // namespace detail

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    return detail::checked_cast(static_cast<__int128>(a) + b, "add");
}
inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    return detail::checked_cast(static_cast<__int128>(a) - b, "sub");
}
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    return detail::checked_cast(static_cast<__int128>(a) * b, "mul");
}

/// Exact rational with canonical form den > 0, gcd(num, den) = 1.
/// All certification arithmetic (costs, bounds, coordinates) runs on these;
/// no floating point is allowed anywhere near a verdict.
class Rat {
public:
    constexpr Rat() = default;
    Rat(std::int64_t n) : num_(n), den_(1) {} // NOLINT: implicit by design
    Rat(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
        __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from_wide(n, d, "rat add");
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        __int128 n = static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_;
        __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from_wide(n, d, "rat sub");
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_,
                         static_cast<__int128>(a.den_) * b.den_, "rat mul");
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw overflow_error("rational division by zero");
        return from_wide(static_cast<__int128>(a.num_) * b.den_,
                         static_cast<__int128>(a.den_) * b.num_, "rat div");
    }
    Rat operator-() const { Rat r; r.num_ = -num_; r.den_ = den_; return r; }
    Rat& operator+=(const Rat& o) { *this = *this + o; return *this; }
    Rat& operator-=(const Rat& o) { *this = *this - o; return *this; }
    Rat& operator*=(const Rat& o) { *this = *this * o; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    Rat abs() const { return num_ < 0 ? -*this : *this; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Canonical "p/q" form ("p" when q = 1); the wire format for costs.
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    static Rat parse(const std::string& s);

private:
    static Rat from_wide(__int128 n, __int128 d, const char* op) {
        if (d == 0) throw overflow_error("rational zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd_wide(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        Rat r;
        r.num_ = detail::checked_cast(n, op);
        r.den_ = detail::checked_cast(d, op);
        return r;
    }
    static __int128 gcd_wide(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }
    void normalize() {
        if (den_ == 0) throw overflow_error("rational zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rat Rat::parse(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(std::stoll(s));
        return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw overflow_error("unparsable rational: " + s);
    }
}

} // namespace hopflink
