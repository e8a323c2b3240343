#pragma once

#include <array>
#include <vector>

#include "hopflink/link_types.hpp"
#include "hopflink/rational.hpp"

namespace hopflink {

struct DegenerateProjection : calculus_error {
    using calculus_error::calculus_error;
};

/// Closed oriented polyline (last point connects back to the first) carrying
/// an integer wire multiplicity.
struct Polyline3 {
    std::vector<std::array<Rat, 3>> points;
    Int multiplicity = 1;
};

struct LinkingReport {
    std::vector<std::vector<Int>> lk; // symmetric pairwise linking numbers
    std::vector<Int> framing;         // writhe (blackboard framing) per wire
    Int total_hopf = 0;               // sum 2 lk_ij m_i m_j + sum framing_i m_i^2
};

/// Exact pairwise linking numbers by signed crossing counting in a generic
/// projection; the projection is sheared deterministically until generic
/// (at most 8 retries, then DegenerateProjection).
LinkingReport linking_oracle(const std::vector<Polyline3>& wires);

/// Serial reference implementation (identical results; kept for testing the
/// OpenMP kernel and for the benchmark).
LinkingReport linking_oracle_serial(const std::vector<Polyline3>& wires);

// Canonical realizations used to ground the symbolic Hopf formulas.
/// Hopf pair of multiplicities (a, b): two linked diamonds, lk = +1.
std::vector<Polyline3> hopf_pair_polylines(Int a, Int b);
/// d unit wires with a half Dehn twist, closed braid-style.
std::vector<Polyline3> twisted_strands_polylines(Int d);
/// Swapping cable: blocks of d1 and d2 wires exchanging places.
std::vector<Polyline3> swap_polylines(Int d1, Int d2);

} // namespace hopflink
