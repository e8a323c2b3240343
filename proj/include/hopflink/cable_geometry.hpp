#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hopflink/link_types.hpp"
#include "hopflink/rational.hpp"

namespace hopflink {

using Vec2R = std::array<Rat, 2>;

/// Row of `width` wires translating rigidly along a sampled centerline path;
/// occupies the box [v1, v1+width] x [v2, v2+1] at each parameter sample.
struct StripeSpec {
    Int width = 1;
    std::vector<Vec2R> path; // sampled at uniform step h over [0, length]
};

/// Discretized abstract cable: ordered disjoint stripes inside [0, Kn]^2
/// whose ends lie inside [0, n]^2.
struct AbstractCableSpec {
    Int n = 1;       // size
    Int K = 4;       // expansion constant (>= 2)
    Rat length{0};   // a
    Rat h{1, 8};     // sample step
    Rat V{1};        // stripe path Lipschitz bound
    std::vector<StripeSpec> stripes;

    std::size_t samples() const { return stripes.empty() ? 0 : stripes[0].path.size(); }
};

struct CableReport {
    bool ok = true;
    std::string what;
    Int stripe_i = -1;
    Int stripe_j = -1;
    Rat alpha{0};
    std::string to_string() const;
};

/// Checks stripe budget, path Lipschitz bound, pairwise disjointness, the
/// lexicographic order condition, the bulk box and the end boxes, at every
/// sample. speed_bound overrides the per-path Lipschitz bound (comb frames
/// legitimately run faster by the 2V+4K factor).
CableReport validate_cable(const AbstractCableSpec& c,
                           std::optional<Rat> speed_bound = std::nullopt);

struct CableHomotopy {
    std::vector<AbstractCableSpec> frames; // uniform unit time step
    Rat max_path_speed{0};                 // measured over all frames
    Rat max_time_speed{0};                 // measured between adjacent frames
    Rat speed_bound{0};                    // 2V + 4K
};

/// Three-phase homotopy between cables with identical stripe widths and
/// identical ends: freeze the ends, comb the stripes into separate rows,
/// then interpolate. Endpoint frames equal the inputs exactly.
CableHomotopy comb(const AbstractCableSpec& c1, const AbstractCableSpec& c2);

/// Zero-length cross-section: stripe widths with their box positions.
struct CrossSection {
    std::vector<std::pair<Int, Vec2R>> stripes; // (width, position)
};

/// Cable over [0, 4n] realizing `start` at 0 and `end` at 4n.
AbstractCableSpec reshape(const CrossSection& start, const CrossSection& end,
                          Int n, Int K, const Rat& h);

/// Greedy wire-to-stripe partition: maximal runs constant in both row
/// assignments. Returns run lengths; at most 2L runs.
std::vector<Int> greedy_striping(const std::vector<Int>& start_rows,
                                 const std::vector<Int>& end_rows, Int L);

} // namespace hopflink
