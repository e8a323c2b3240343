#pragma once

// Cross-module internals shared by the calculus, the coarsening pipeline and
// the trace verifier.

#include "hopflink/link_calculus.hpp"

namespace hopflink::hopf_detail {

struct TwistParts {
    InterlockedLink interlocked;
    int rem_sign = +1;
    BalancedLink remainder;
    Int eps = 0;
};

TwistParts twist_parts(Int d);
LinkExpression twist_expansion(Int d, int sign);
Rat interlocked_recursion_cost(const InterlockedLink& t, int partner_sign, const BalancedLink& partner,
                               const CostModel& model);

/// Cancellation of sx*x - sy*y (equal signed Hopf); generalizes cancel() to
/// oriented links, used by the plan's terminal step.
MoveTrace cancel_signed(int sx, const BalancedLink& x, int sy, const BalancedLink& y,
                        const CostModel& model);

} // namespace hopflink::hopf_detail
