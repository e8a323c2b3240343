#pragma once

#include <string>
#include <vector>

#include "hopflink/link_types.hpp"
#include "hopflink/rational.hpp"
#include "hopflink/roots.hpp"

namespace hopflink {

struct RatioOutOfRange : calculus_error { using calculus_error::calculus_error; };
struct InsufficientData : calculus_error { using calculus_error::calculus_error; };

/// Geometric series ceiling first/(1-ratio), exact rational.
struct SeriesBound {
    Rat first_term;
    Rat ratio;
    Rat closed_form;
};

SeriesBound series_ceiling(const Rat& first_term, const Rat& ratio);

/// Flux lower bound for the Whitehead family: total degree L^n against a
/// boundary flux capacity C*L^(n-1) gives minimal homotopy length L/C.
struct LowerBoundResult {
    Rat length;
    Rat total_degree;
    Rat flux_capacity;
};

LowerBoundResult lower_bound_length(Int L, Int n, const Rat& C);

/// Linearity check over plan totals at increasing ladder exponents: one
/// constant C_total with total(N) <= C_total * 2^N, successive ratios in
/// [3/2, 5/2].
struct ScalingVerdict {
    bool accept = true;
    Rat c_total{0};
    std::string detail;
};

ScalingVerdict verify_linear_scaling(const std::vector<std::pair<Int, Rat>>& totals_by_N);

} // namespace hopflink
