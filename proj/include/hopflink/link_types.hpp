#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hopflink/rational.hpp"
#include "hopflink/roots.hpp"

namespace hopflink {

using Int = std::int64_t;

// ---------------------------------------------------------------------------
// Link terms
// ---------------------------------------------------------------------------

/// Hopf link of two cables of degrees a and b. Degrees may be negative
/// (orientation); c|1 terms are Standard{c,1}.
struct StandardLink {
    Int a = 0;
    Int b = 0;
    friend bool operator==(const StandardLink&, const StandardLink&) = default;
};

/// Unit-Hopf loop: a wire loop with a 1-turn Dehn twist, multiplicity
/// eps in {-1,0,+1}.
struct UnitLoop {
    Int eps = 0;
    friend bool operator==(const UnitLoop&, const UnitLoop&) = default;
};

/// Loop cable of degree d altered by half a Dehn twist.
struct TwistedLink {
    Int d = 0;
    friend bool operator==(const TwistedLink&, const TwistedLink&) = default;
};

/// Two ring cables whose stripe groups link in a staircase pattern:
/// group i of the first cable links group j of the second iff i+j > n.
struct InterlockedLink {
    Int n = 1;
    std::vector<Int> a;
    std::vector<Int> b;
    friend bool operator==(const InterlockedLink&, const InterlockedLink&) = default;
};

/// A collection of swapping cables (block pairs exchanging places), carried
/// as one term while a wire monodromy is being trivialized. Each swap of
/// blocks d1, d2 is worth Hopf d1*d2 and expands to three twisted links.
struct SwapCables {
    std::vector<std::pair<Int, Int>> swaps;
    friend bool operator==(const SwapCables&, const SwapCables&) = default;
};

using LinkTerm = std::variant<StandardLink, UnitLoop, TwistedLink, InterlockedLink, SwapCables>;

struct SignedTerm {
    int sign = +1; // +1 or -1
    LinkTerm term;
    friend bool operator==(const SignedTerm&, const SignedTerm&) = default;
};

/// Total order on terms (variant index, then fields) so expressions can be
/// compared as multisets and serialized canonically.
bool term_less(const SignedTerm& x, const SignedTerm& y);

/// Formal signed sum of link terms: the state the rewrite engine acts on.
struct LinkExpression {
    std::vector<SignedTerm> terms;

    bool empty() const { return terms.empty(); }
    std::size_t size_terms() const { return terms.size(); }

    LinkExpression& add(int sign, LinkTerm t) {
        terms.push_back(SignedTerm{sign, std::move(t)});
        return *this;
    }
    friend bool operator==(const LinkExpression&, const LinkExpression&) = default;
};

// ---------------------------------------------------------------------------
// Balanced links
// ---------------------------------------------------------------------------

/// Normal form a|b + c|1 (+ eps·unit) with 2b >= a >= b and a >= c
/// (or the all-zero link). Hopf invariant 2(ab+c) + eps.
struct BalancedLink {
    Int a = 0;
    Int b = 0;
    Int c = 0;
    Int eps = 0;
    friend bool operator==(const BalancedLink&, const BalancedLink&) = default;
};

inline bool balanced_predicate(Int a, Int b, Int c) {
    if (a == 0 && b == 0 && c == 0) return true;
    return a >= 0 && b >= 0 && c >= 0 && 2 * b >= a && a >= b && a >= c;
}

inline bool is_balanced(const BalancedLink& l) {
    return balanced_predicate(l.a, l.b, l.c) && l.eps >= -1 && l.eps <= 1;
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct calculus_error : std::runtime_error {
    explicit calculus_error(const std::string& w) : std::runtime_error(w) {}
};
struct MismatchedMove : calculus_error { using calculus_error::calculus_error; };
struct ParityError : calculus_error { using calculus_error::calculus_error; };
struct PreconditionError : calculus_error { using calculus_error::calculus_error; };
struct HopfMismatch : calculus_error { using calculus_error::calculus_error; };
struct SizeMismatch : calculus_error { using calculus_error::calculus_error; };
struct InvalidPermutation : calculus_error { using calculus_error::calculus_error; };

// ---------------------------------------------------------------------------
// Cost model
// ---------------------------------------------------------------------------

/// kappa is the length charge per unit of size; C_bal and C_cancel are the
/// geometric-series ceilings 1/(1-1/sqrt 2) and 1/(1-sqrt(5/6)) rounded up.
/// B is the cancellation base-case threshold, C_slack the additive constant
/// of the balance termination condition a_N <= 2 b_N + 3C/2.
struct CostModel {
    Rat kappa{1};
    Rat C_bal{7, 2};
    Rat C_cancel{12};
    Int B = 64;
    Int C_slack = 4;
};

} // namespace hopflink
