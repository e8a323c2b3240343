#include "hopflink/bounds.hpp"

#include <algorithm>

namespace hopflink {

SeriesBound series_ceiling(const Rat& first_term, const Rat& ratio) {
    if (!(Rat(0) < ratio && ratio < Rat(1))) throw RatioOutOfRange("ratio must lie in (0,1)");
    SeriesBound b;
    b.first_term = first_term;
    b.ratio = ratio;
    b.closed_form = first_term / (Rat(1) - ratio);
    return b;
}

LowerBoundResult lower_bound_length(Int L, Int n, const Rat& C) {
    if (L < 1 || n < 1) throw PreconditionError("lower_bound_length: L and n must be positive");
    if (!(Rat(0) < C)) throw PreconditionError("lower_bound_length: C must be positive");
    Rat degree(1);
    for (Int i = 0; i < n; ++i) degree *= Rat(L);
    Rat flux = C * (degree / Rat(L));
    LowerBoundResult r;
    r.total_degree = degree;
    r.flux_capacity = flux;
    r.length = degree / flux; // = L / C
    return r;
}

ScalingVerdict verify_linear_scaling(const std::vector<std::pair<Int, Rat>>& totals) {
    Int kmax = 0;
    for (const auto& [N, total] : totals) kmax = std::max(kmax, N);
    if (totals.size() < 3 || kmax < 4) throw InsufficientData("need reports up to k >= 4");

    auto sorted = totals;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ScalingVerdict v;
    bool all_zero = true;
    for (const auto& [N, total] : sorted) {
        Rat per = total / Rat(Int(1) << N);
        if (per > v.c_total) v.c_total = per;
        if (!total.is_zero()) all_zero = false;
    }
    if (all_zero) {
        v.detail = "degenerate: all totals zero";
        return v;
    }
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].first != sorted[i - 1].first + 1) continue;
        if (sorted[i - 1].second.is_zero()) {
            v.accept = false;
            v.detail = "zero total at N=" + std::to_string(sorted[i - 1].first);
            return v;
        }
        Rat ratio = sorted[i].second / sorted[i - 1].second;
        if (ratio < Rat(3, 2) || ratio > Rat(5, 2)) {
            v.accept = false;
            v.detail = "ratio " + ratio.str() + " at N=" + std::to_string(sorted[i].first) +
                       " outside [3/2, 5/2]";
            return v;
        }
    }
    v.detail = "C_total = " + v.c_total.str();
    return v;
}

} // namespace hopflink
