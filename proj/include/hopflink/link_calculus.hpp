#pragma once

#include <utility>
#include <vector>

#include "hopflink/link_types.hpp"
#include "hopflink/trace.hpp"

namespace hopflink {

// ---------------------------------------------------------------------------
// Invariants of terms and expressions
// ---------------------------------------------------------------------------

/// Hopf invariant: H(a|b) = 2ab, H(unit) = eps, H(twisted d) = d(d-1)/2,
/// H(interlocked) = 2 * sum over staircase-linked pairs (i+j > n) of a_i b_j.
Int hopf_invariant(const LinkTerm& t);
Int hopf_invariant(const LinkExpression& e);
Int hopf_invariant(const BalancedLink& l);

/// Linear size of the bounding brick: ceil(sqrt(max degree)) for standard and
/// twisted links, max(a_i, b_i, n) for interlocked, 1 for a unit loop.
Int size_of(const LinkTerm& t);
/// Max term size plus ceil(log2(1 + #terms)) packing slack.
Int size_of(const LinkExpression& e);
Int size_of(const BalancedLink& l);

/// a|b + c|1 + eps as an expression; zero standard parts are dropped except
/// keep_c forces an explicit c|1 term (the balance loop works on that shape).
LinkExpression balanced_to_expression(const BalancedLink& l, int sign = +1, bool keep_c = false);

/// Deterministic balanced representative of an integer Hopf invariant,
/// returned as sign * BalancedLink (sign = -1 for negative h).
std::pair<int, BalancedLink> canonical_balanced(Int h);

// ---------------------------------------------------------------------------
// Primitive moves (each returns the rewritten expression plus one step)
// ---------------------------------------------------------------------------

std::pair<LinkExpression, MoveStep> merge_parallel(const LinkExpression& e, std::size_t i, std::size_t j);
/// dir = +1: Standard{2a,b} -> Standard{a,2b}; dir = -1: the inverse.
std::pair<LinkExpression, MoveStep> shift_double(const LinkExpression& e, std::size_t i, int dir = +1);
/// dir = +1: a|b + c|1 -> a|(b+1) + (c-a)|1 for same-sign terms; dir = -1 inverse.
std::pair<LinkExpression, MoveStep> transfer_unit(const LinkExpression& e, std::size_t i, std::size_t j, int dir = +1);
std::pair<LinkExpression, MoveStep> transpose_link(const LinkExpression& e, std::size_t i);

// ---------------------------------------------------------------------------
// Composite operations
// ---------------------------------------------------------------------------

/// Crude balancing of a|b + c|1 (+unit): halves a and doubles b per round
/// until 2b >= a, then adjusts. Requires a >= b >= 0 and 0 <= c <= 8a.
std::pair<BalancedLink, MoveTrace> balance(const LinkExpression& x, const CostModel& model);
std::pair<BalancedLink, MoveTrace> balance(const BalancedLink& x, const CostModel& model);

/// Trace transforming x into target (equal Hopf invariant): insert
/// (-target + target), cancel (x - target).
MoveTrace rebalance(const BalancedLink& x, const BalancedLink& target, const CostModel& model);

/// Trace reducing x - y to the empty expression (equal Hopf invariant).
MoveTrace cancel(const BalancedLink& x, const BalancedLink& y, const CostModel& model);

/// Trace transforming x +/- y into target when the Hopf invariants match.
MoveTrace add_balanced(const BalancedLink& x, const BalancedLink& y, const BalancedLink& target,
                       bool subtract, const CostModel& model);

/// Expression a|b + c|1 + unit carrying Hopf invariant h, degrees <= ~sqrt|h|.
LinkExpression represent_hopf(Int h);

/// Pairs same-sign units into 1|1 links, cancels opposite units, drops zeros.
std::pair<LinkExpression, MoveTrace> absorb_units(const LinkExpression& e);

/// One splitting round of an interlocked link against its balanced partner:
/// 8 sub-pairs with n and all entries halved (ceil paired with floor).
struct InterlockedPair {
    InterlockedLink interlocked;
    int partner_sign = +1;
    BalancedLink partner;
};
std::pair<std::vector<InterlockedPair>, MoveTrace>
split_interlocked_step(const InterlockedLink& t, const BalancedLink& partner);

/// Full recursion of split_interlocked_step down to parameters < 10 plus
/// base certificates; cost <= 2 kappa (size + 4).
MoveTrace interlocked_to_balanced(const InterlockedLink& t, const BalancedLink& target,
                                  const CostModel& model);

/// Twisted link into interlocked + balanced remainder + unit (Hopf conserved).
std::pair<LinkExpression, MoveTrace> twisted_to_interlocked(const TwistedLink& t);

MoveTrace twisted_to_balanced(const TwistedLink& t, const BalancedLink& target, const CostModel& model);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Pure replay of a trace: every step must be a legal instance of its named
/// move (a), conserve the Hopf invariant (b), charge exactly the model cost
/// (c), and chain from initial to final (d).
VerifyReport verify_trace(const LinkExpression& initial, const MoveTrace& trace,
                          const LinkExpression& final_expr, const CostModel& model);

// Multiset view used by the verifier: expressions in traces are compared as
// unordered term collections.
bool same_term_multiset(const LinkExpression& a, const LinkExpression& b);

LinkExpression negate_expression(const LinkExpression& e);
LinkExpression concat_expressions(const LinkExpression& a, const LinkExpression& b);

} // namespace hopflink
