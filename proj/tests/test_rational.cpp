#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hopflink/rational.hpp"
#include "hopflink/roots.hpp"

using namespace hopflink;
using Int = std::int64_t;

TEST_CASE("rational arithmetic is exact and canonical") {
    CHECK(Rat(2, 4) == Rat(1, 2));
    CHECK(Rat(1, 2) + Rat(1, 3) == Rat(5, 6));
    CHECK(Rat(1, 2) - Rat(1, 2) == Rat(0));
    CHECK(Rat(3, 4) * Rat(2, 3) == Rat(1, 2));
    CHECK(Rat(1, 2) / Rat(1, 4) == Rat(2));
    CHECK(Rat(-1, -2) == Rat(1, 2));
    CHECK(Rat(1, -2) == Rat(-1, 2));
    CHECK(Rat(7, 3) > Rat(2));
    CHECK((-Rat(1, 2)).is_negative());
}

TEST_CASE("rational string round trip") {
    CHECK(Rat(22, 7).str() == "22/7");
    CHECK(Rat(5).str() == "5");
    CHECK(Rat::parse("22/7") == Rat(22, 7));
    CHECK(Rat::parse("-3") == Rat(-3));
    CHECK_THROWS_AS(Rat::parse("abc"), overflow_error);
}

TEST_CASE("division by zero and overflow are hard errors") {
    CHECK_THROWS_AS(Rat(1, 0), overflow_error);
    CHECK_THROWS_AS(Rat(1) / Rat(0), overflow_error);
    CHECK_THROWS_AS(checked_mul(INT64_MAX, 2), overflow_error);
    CHECK_NOTHROW(checked_mul(INT64_MAX, 1));
}

TEST_CASE("integer square roots") {
    for (Int n : {0, 1, 2, 3, 4, 8, 9, 15, 16, 17, 10000, 99980001}) {
        Int r = isqrt(n);
        CHECK(r * r <= n);
        CHECK((r + 1) * (r + 1) > n);
        Int rc = isqrt_ceil(n);
        CHECK(rc * rc >= n);
        CHECK((rc == 0 ? 0 : (rc - 1) * (rc - 1)) < (n == 0 ? 1 : n + 1));
    }
    CHECK(isqrt_ceil(16) == 4);
    CHECK(isqrt_ceil(17) == 5);
}

TEST_CASE("sqrt enclosures bracket the root within 2^-10") {
    for (Int n : {1, 2, 3, 5, 10, 1000, 10007}) {
        Rat up = sqrt_upper(Rat(n));
        Rat lo = sqrt_lower(Rat(n));
        CHECK(lo <= up);
        CHECK(up - lo <= Rat(2, 1 << 10));
        CHECK(up * up >= Rat(n));
        CHECK(lo * lo <= Rat(n));
    }
    // ratio enclosure used by the series bounds: 1/sqrt(2)
    Rat r = sqrt_upper(Rat(1, 2));
    CHECK(r * r >= Rat(1, 2));
    CHECK(r < Rat(1));
}
