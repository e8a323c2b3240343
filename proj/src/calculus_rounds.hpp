#pragma once

// Deterministic state machines behind the composite trace steps. Both the
// trace builders and the verifier call these, so a replay is bit-identical
// to the original run by construction.

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "hopflink/link_calculus.hpp"

namespace hopflink::detail {

/// Working state of the crude balancing loop: a|b + c|1 (+ eps unit).
struct BalState {
    Int a = 0, b = 0, c = 0, eps = 0;
    friend bool operator==(const BalState&, const BalState&) = default;
};

inline LinkExpression bal_state_expr(const BalState& s) {
    LinkExpression e;
    e.add(+1, StandardLink{s.a, s.b});
    e.add(+1, StandardLink{s.c, 1});
    if (s.eps != 0) e.add(+1, UnitLoop{s.eps});
    return e;
}

/// Initial c-excess reduction: k = floor(c/a) transfers, leaving c mod a.
inline Int reduce_excess_count(const BalState& s) {
    if (s.a < 1 || s.c < s.a) return 0;
    return s.c / s.a;
}
inline BalState reduce_excess_apply(const BalState& s) {
    Int k = reduce_excess_count(s);
    return BalState{s.a, s.b + k, s.c - k * s.a, s.eps};
}

/// One crude-balance round: odd fix, halving shift, then at most three
/// c-reductions. Caller guarantees a >= 2 and c < a on entry.
inline BalState balance_round_apply(const BalState& s) {
    Int a = s.a, b = s.b, c = s.c;
    if (a % 2 != 0) { a -= 1; c += b; }       // a|b -> (a-1)|b + 1|b;  1|b ~ b|1 merges into c
    a /= 2; b *= 2;                            // 2a'|b ~ a'|2b
    int guard = 0;
    while (c >= a && a >= 1) {
        b += 1; c -= a;                        // a|(b+1) + (c-a)|1
        if (++guard > 3) throw calculus_error("balance round: more than 3 c-reductions");
    }
    return BalState{a, b, c, s.eps};
}

inline bool balance_loop_continues(const BalState& s, Int slack) {
    return s.a >= 2 && s.a > 2 * s.b + slack;
}

/// Greedy post-loop adjustment into the balanced cone. Returns the end state
/// and the maximum coordinate visited (the step's cost scale).
struct AdjustResult {
    BalState end;
    Int max_seen = 0;
    int moves = 0;
};
inline AdjustResult final_adjust_apply(const BalState& s) {
    BalState t = s;
    AdjustResult r;
    auto note = [&] { r.max_seen = std::max({r.max_seen, t.a, t.b, t.c}); };
    note();
    for (int i = 0; i < 64; ++i) {
        if (balanced_predicate(t.a, t.b, t.c)) { r.end = t; return r; }
        ++r.moves;
        if (t.a < t.b) {
            std::swap(t.a, t.b);               // transpose a|b ~ b|a
        } else if (t.c >= t.a && t.a >= 1) {
            t.b += 1; t.c -= t.a;              // transfer: a|(b+1) + (c-a)|1
        } else if (t.a == 0 && t.c >= 1) {
            t.b += 1;                          // 0|b + c|1 -> 0|(b+1) + c|1; transpose follows
        } else if (t.a > 2 * t.b && t.a >= 1) {
            t.a -= 1; t.c += t.b;              // peel 1|b off a, fold into c
        } else {
            break;
        }
        note();
    }
    throw calculus_error("final adjust did not converge in 64 moves");
}

// ---------------------------------------------------------------------------
// Cancellation rounds
// ---------------------------------------------------------------------------

/// Difference state  +(a1|b1) - (a2|b2) + c|1 + eps*unit,  total Hopf 0.
/// Orientation is folded into the a-degrees (they may be negative);
/// b1, b2 stay nonnegative.
struct CancelState {
    Int a1 = 0, b1 = 0;
    Int a2 = 0, b2 = 0;
    Int c = 0, eps = 0;
    friend bool operator==(const CancelState&, const CancelState&) = default;
};

inline LinkExpression cancel_state_expr(const CancelState& s) {
    LinkExpression e;
    e.add(+1, StandardLink{s.a1, s.b1});
    e.add(-1, StandardLink{s.a2, s.b2});
    e.add(+1, StandardLink{s.c, 1});
    if (s.eps != 0) e.add(+1, UnitLoop{s.eps});
    return e;
}

inline Int cancel_state_hopf(const CancelState& s) {
    return 2 * (s.a1 * s.b1 - s.a2 * s.b2 + s.c) + s.eps;
}

inline Int cancel_scale(const CancelState& s) {
    return std::max({std::abs(s.a1), std::abs(s.b1), std::abs(s.a2), std::abs(s.b2), std::abs(s.c)});
}

/// One split pass of the cancellation loop: parity-fix both b's against the
/// shared c|1, apply the splitting identity, then rebalance the first side
/// together with the c channel (the loop's "balance a'_1|b'_1 + c" step) and
/// the subtracted side on its own.
inline CancelState cancel_pass(const CancelState& s) {
    Int a1 = s.a1, b1 = s.b1, a2 = s.a2, b2 = s.b2, c = s.c, eps = s.eps;

    // make b1, b2 even:  +a|b + c|1 ~ +a|(b-1) + (c+a)|1,  -a|b + c|1 ~ -a|(b-1) + (c-a)|1
    if (b1 % 2 != 0) { b1 -= 1; c += a1; }
    if (b2 % 2 != 0) { b2 -= 1; c -= a2; }

    // splitting identity:  a1|b1 - b2|a2  ->  (a1 - b2/2)|b1 - b2|(a2 - b1/2)
    Int na1 = a1 - b2 / 2;
    Int nb1 = b1;
    Int na2 = b2;
    Int nb2 = a2 - b1 / 2;

    // rebalance: the x side absorbs the c channel, keeping it below ~sqrt(h)
    Int hx = 2 * checked_add(checked_mul(na1, nb1), c);
    Int hy = 2 * checked_mul(na2, nb2);
    auto [g1, l1] = canonical_balanced(hx);
    auto [g2, l2] = canonical_balanced(hy);
    CancelState out;
    out.a1 = g1 * l1.a; out.b1 = l1.b;
    out.a2 = g2 * l2.a; out.b2 = l2.b;
    out.c = g1 * l1.c - g2 * l2.c;
    out.eps = eps + g1 * l1.eps - g2 * l2.eps;
    while (out.eps >= 2) { out.eps -= 2; out.c += 1; }   // unit pair ~ 1|1 merged into c
    while (out.eps <= -2) { out.eps += 2; out.c -= 1; }
    return out;
}

/// One cancel round = two split passes; the subtracted side's product shrinks
/// by a factor well under 5/6 per round.
inline CancelState cancel_round_apply(const CancelState& s) {
    return cancel_pass(cancel_pass(s));
}

} // namespace hopflink::detail
