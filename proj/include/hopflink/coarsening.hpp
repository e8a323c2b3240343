#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hopflink/link_calculus.hpp"
#include "hopflink/monodromy.hpp"
#include "hopflink/trace.hpp"

namespace hopflink {

// ---------------------------------------------------------------------------
// Template table
// ---------------------------------------------------------------------------

/// Faces of a cell: 0:-x 1:+x 2:-y 3:+y 4:-z 5:+z.
struct TemplateCable {
    int id = 0;
    int face_from = 0; // wires enter here
    int face_to = 0;   // and leave here
};

/// Fixed per-cell cable routing: one cable per ordered pair of distinct
/// faces, plus the crossing matrix lambda and the half-turn vector tau
/// generated once from canonical closed centerlines via the linking oracle.
struct TemplateTable {
    std::vector<TemplateCable> cables;      // 30 entries, id = index
    std::vector<std::vector<Int>> lambda;   // symmetric 30x30
    std::vector<Int> tau;                   // half-turn counts (even)
    std::uint64_t generation_hash = 0;

    static TemplateTable generate();
    int cable_for(int face_from, int face_to) const;
    /// Cables meeting a face, in the fixed per-face order (ascending id).
    std::vector<int> cables_at(int face) const;
};

/// tau half-turns on a degree-d cable: tau twists plus one wire turn per
/// full turn (two half-turns make a full turn of Hopf weight d^2).
inline Int twist_contribution(Int tau, Int d) {
    return checked_add(checked_mul(tau, checked_mul(d, d - 1) / 2),
                       checked_mul(tau / 2, d));
}

// ---------------------------------------------------------------------------
// Cubical maps
// ---------------------------------------------------------------------------

/// Cell link with an orientation: Hopf contribution sign * H(link).
struct CellLink {
    int sign = +1;
    BalancedLink link;
    friend bool operator==(const CellLink&, const CellLink&) = default;
};

/// Map cubical at scale s = 2^level on the grid [0, 2^N]^3. Face degrees are
/// fluxes in the positive axis direction; cells carry balanced links.
struct CubicalMap {
    Int N = 1;
    Int level = 0;
    std::vector<Int> face_deg[3]; // axis a: (m+1) * m * m values
    std::vector<CellLink> cells;  // m^3
    Int hopf_total = 0;
    Int c_deg = 2;

    Int side() const { return Int(1) << (N - level); } // cells per axis
    Int scale() const { return Int(1) << level; }

    Int face_index(int axis, Int i, Int j, Int k) const;
    Int& face(int axis, Int i, Int j, Int k);
    Int face(int axis, Int i, Int j, Int k) const;
    Int cell_index(Int x, Int y, Int z) const;
    CellLink& cell(Int x, Int y, Int z);
    const CellLink& cell(Int x, Int y, Int z) const;

    static CubicalMap zero_map(Int N, Int level = 0);
};

struct MapReport {
    bool ok = true;
    std::string what;
    std::string to_string() const { return ok ? "ok" : what; }
};

/// Boundary-zero, per-cell closure, degree bound |deg| <= c_deg s^2,
/// link size fit 2 ceil(sqrt a) <= s, and hopf_total consistency.
MapReport validate_map(const CubicalMap& m, const TemplateTable& t);

/// Outward fluxes of one cell, faces ordered -x +x -y +y -z +z; sums to 0.
std::array<Int, 6> cell_out_fluxes(const CubicalMap& m, Int x, Int y, Int z);

/// Spec-ordered greedy routing: each incoming face's surplus goes to the
/// lexicographically first outgoing face with remaining capacity.
std::vector<Int> assign_cable_degrees(const std::array<Int, 6>& out_flux, const TemplateTable& t);

/// Per-face wire intervals [start, start+d) per cable, in face order.
struct WireRange {
    int cable = 0;
    Int start = 0;
    Int len = 0;
};
std::vector<WireRange> wire_ranges(const std::array<Int, 6>& out_flux, const TemplateTable& t, int face);

/// Per-cell Hopf contribution of the template cables (crossings + twists).
Int cell_template_hopf(const std::array<Int, 6>& out_flux, const TemplateTable& t);

/// Stored hopf_total must equal this sum.
Int map_hopf(const CubicalMap& m, const TemplateTable& t);

// ---------------------------------------------------------------------------
// Clutching
// ---------------------------------------------------------------------------

struct DescriptorCable {
    int cell = 0; // 0..7 fine (x + 2y + 4z), 8 coarse
    int tid = 0;  // template cable id
    Int degree = 0;
};

struct ClutchingDescriptor {
    std::vector<DescriptorCable> cables;
    /// Sparse crossing entries (cable indices into `cables`), coarse-side
    /// entries already negated.
    struct LambdaEntry { int i, j; Int value; };
    std::vector<LambdaEntry> lambda;
    std::vector<Int> tau; // per descriptor cable, coarse-side negated
    BlockPermutation monodromy;
    Int hopf_residual = 0;
    bool mirrored = false; // monodromy inserted as a +/- swap pair

    /// Balanced links carried by the block's cells (cell 8 = coarse, entering
    /// with reversed orientation). When empty, the residual is realized by
    /// represent_hopf instead (standalone descriptors).
    struct CellLinkEntry { int cell; int sign; BalancedLink link; };
    std::vector<CellLinkEntry> cell_links;

    Int crossing_hopf() const;
    Int twist_hopf() const;
    Int monodromy_hopf() const; // 0 when mirrored
    Int link_channel_hopf() const;
    bool invariant_holds() const;

    std::vector<Int> encode() const;
    static ClutchingDescriptor decode(const std::vector<Int>& flat);
};

struct InconsistentBlock : calculus_error {
    using calculus_error::calculus_error;
};

/// Descriptor of the clutching of one 2x2x2 block of m against the coarse
/// cell covering it (bx, by, bz in coarse cell coordinates).
ClutchingDescriptor build_clutching(const CubicalMap& m, Int bx, Int by, Int bz,
                                    const CubicalMap& coarse, const TemplateTable& t);

/// Start expression of the clutching null-homotopy (residual link, crossing
/// links, twist terms, swap bundles); Hopf 0 when the invariant holds.
LinkExpression clutching_start_expression(const ClutchingDescriptor& d);

/// Detailed certified trace from the start expression to empty.
MoveTrace null_homotopy_clutching(const ClutchingDescriptor& d, const CostModel& model);

/// Cost (and validity) of the same construction without retaining steps;
/// used by the compact per-block trace steps and their verification.
Rat clutching_cost(const ClutchingDescriptor& d, const CostModel& model);

// ---------------------------------------------------------------------------
// Coarsening pipeline
// ---------------------------------------------------------------------------

/// One scale-doubling step: merged face degrees, conservation-chosen coarse
/// links, and one parallel batch step holding the per-block traces.
std::pair<CubicalMap, MoveTrace> coarsen_step(const CubicalMap& m, const TemplateTable& t,
                                              const CostModel& model);

struct PlanReport {
    std::vector<Rat> level_costs; // per level, both maps combined
    Rat cancel_cost{0};
    Rat total_cost{0};
    bool linear_verdict = true;
    std::string verdict_detail;
    std::vector<MoveTrace> traces_f0;
    std::vector<MoveTrace> traces_f1;
    MoveTrace cancel_trace;
};

PlanReport plan_homotopy(const CubicalMap& f0, const CubicalMap& f1, const TemplateTable& t,
                         const CostModel& model);

// ---------------------------------------------------------------------------
// Generators (used by the CLI and the acceptance suite)
// ---------------------------------------------------------------------------

/// Random valid map built from axis-aligned flux loops (sign-coherent across
/// scales) plus random fitting cell links.
CubicalMap random_valid_map(Int N, std::uint64_t seed, const TemplateTable& t);
/// Adjusts f1's unit channels until hopf_total(f1) == hopf_total(f0).
void match_hopf_totals(const CubicalMap& f0, CubicalMap& f1, const TemplateTable& t);
/// Whitehead-family encoding: a degree-saturated flux tube of circulation
/// ~L^2 inside the [0, L]^3 grid (null-homotopic, hopf_total 0).
CubicalMap whitehead_map(Int L, const TemplateTable& t);

} // namespace hopflink
