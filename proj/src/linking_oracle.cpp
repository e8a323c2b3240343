#include "hopflink/linking_oracle.hpp"

#include <algorithm>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hopflink {

namespace {

struct Seg {
    Rat x1, y1, z1, x2, y2, z2;
    int wire;
    int index; // position along the wire
};

struct Vec2 {
    Rat x, y;
};

Rat cross2(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

int sgn(const Rat& r) { return r.is_zero() ? 0 : (r.is_negative() ? -1 : 1); }

/// Signed crossing of two projected segments; +1/-1 contributions are split
/// into (lk contribution, writhe contribution, degenerate flag).
struct CrossingResult {
    bool degenerate = false;
    bool crosses = false;
    int sign = 0;     // over-strand-first orientation sign
    bool first_over = false;
};

CrossingResult segment_crossing(const Seg& s, const Seg& t) {
    CrossingResult r;
    Vec2 p{s.x1, s.y1}, d1{s.x2 - s.x1, s.y2 - s.y1};
    Vec2 q{t.x1, t.y1}, d2{t.x2 - t.x1, t.y2 - t.y1};
    Rat denom = cross2(d1, d2);
    Vec2 pq{q.x - p.x, q.y - p.y};
    if (denom.is_zero()) {
        // parallel; collinear overlap is degenerate, otherwise no crossing
        if (cross2(pq, d1).is_zero()) {
            // collinear: check 1-d overlap on the dominant axis
            auto lo1 = std::min(s.x1, s.x2), hi1 = std::max(s.x1, s.x2);
            auto lo2 = std::min(t.x1, t.x2), hi2 = std::max(t.x1, t.x2);
            bool overlap_x = !(hi1 < lo2 || hi2 < lo1);
            auto ly1 = std::min(s.y1, s.y2), hy1 = std::max(s.y1, s.y2);
            auto ly2 = std::min(t.y1, t.y2), hy2 = std::max(t.y1, t.y2);
            bool overlap_y = !(hy1 < ly2 || hy2 < ly1);
            if (overlap_x && overlap_y) r.degenerate = true;
        }
        return r;
    }
    Rat tpar = cross2(pq, d2) / denom;
    Rat upar = cross2(pq, d1) / denom;
    Rat zero(0), one(1);
    if (tpar < zero || tpar > one || upar < zero || upar > one) return r;
    if (tpar == zero || tpar == one || upar == zero || upar == one) {
        r.degenerate = true;
        return r;
    }
    Rat zs = s.z1 + tpar * (s.z2 - s.z1);
    Rat zt = t.z1 + upar * (t.z2 - t.z1);
    if (zs == zt) {
        r.degenerate = true;
        return r;
    }
    r.crosses = true;
    r.first_over = zs > zt;
    // sign with the over strand's direction first
    r.sign = r.first_over ? sgn(denom) : -sgn(denom);
    return r;
}

struct Tally {
    std::vector<std::vector<Int>> raw; // signed crossings per unordered wire pair
    std::vector<Int> writhe;
    bool degenerate = false;
};

struct Projection {
    std::vector<Seg> segs;
    std::vector<int> seg_count; // per wire, after removing duplicate points
};

Projection project(const std::vector<Polyline3>& wires, const Rat& lam, const Rat& mu) {
    Projection pr;
    pr.seg_count.assign(wires.size(), 0);
    for (std::size_t w = 0; w < wires.size(); ++w) {
        // drop consecutive duplicates (including the wraparound one)
        std::vector<std::array<Rat, 3>> pts;
        for (const auto& p : wires[w].points)
            if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
        while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
        std::size_t m = pts.size();
        if (m < 3) throw DegenerateProjection("wire with fewer than 3 distinct points");
        for (std::size_t i = 0; i < m; ++i) {
            const auto& a = pts[i];
            const auto& b = pts[(i + 1) % m];
            Seg s;
            s.x1 = a[0] + lam * a[2]; s.y1 = a[1] + mu * a[2]; s.z1 = a[2];
            s.x2 = b[0] + lam * b[2]; s.y2 = b[1] + mu * b[2]; s.z2 = b[2];
            s.wire = static_cast<int>(w);
            s.index = static_cast<int>(i);
            pr.segs.push_back(std::move(s));
        }
        pr.seg_count[w] = static_cast<int>(m);
    }
    return pr;
}

bool adjacent_on_wire(const Projection& pr, const Seg& a, const Seg& b) {
    if (a.wire != b.wire) return false;
    int m = pr.seg_count[static_cast<std::size_t>(a.wire)];
    int d = std::abs(a.index - b.index);
    return d == 0 || d == 1 || d == m - 1;
}

Tally tally_crossings(std::size_t n, const Projection& pr, bool parallel) {
    const std::vector<Seg>& segs = pr.segs;
    Tally t;
    t.raw.assign(n, std::vector<Int>(n, 0));
    t.writhe.assign(n, 0);

    std::size_t S = segs.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(S * (S - 1) / 2);
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = i + 1; j < S; ++j)
            if (!adjacent_on_wire(pr, segs[i], segs[j])) pairs.emplace_back(i, j);

    bool degenerate = false;
    std::vector<Int> wr(n, 0);
    std::vector<std::vector<Int>> raw(n, std::vector<Int>(n, 0));
    bool ran_parallel = false;

#ifdef _OPENMP
    if (parallel) {
        ran_parallel = true;
#pragma omp parallel
        {
            std::vector<Int> wr_local(n, 0);
            std::vector<std::vector<Int>> raw_local(n, std::vector<Int>(n, 0));
            bool degen_local = false;
#pragma omp for schedule(static) nowait
            for (long long k = 0; k < static_cast<long long>(pairs.size()); ++k) {
                auto [i, j] = pairs[static_cast<std::size_t>(k)];
                CrossingResult c = segment_crossing(segs[i], segs[j]);
                if (c.degenerate) { degen_local = true; continue; }
                if (!c.crosses) continue;
                int wi = segs[i].wire, wj = segs[j].wire;
                if (wi == wj) wr_local[static_cast<std::size_t>(wi)] += c.sign;
                else raw_local[static_cast<std::size_t>(wi)][static_cast<std::size_t>(wj)] += c.sign;
            }
#pragma omp critical
            {
                degenerate = degenerate || degen_local;
                for (std::size_t a = 0; a < n; ++a) {
                    wr[a] += wr_local[a];
                    for (std::size_t b = 0; b < n; ++b) raw[a][b] += raw_local[a][b];
                }
            }
        }
    }
#else
    (void)parallel;
#endif
    if (!ran_parallel) {
        for (auto [i, j] : pairs) {
            CrossingResult c = segment_crossing(segs[i], segs[j]);
            if (c.degenerate) { degenerate = true; continue; }
            if (!c.crosses) continue;
            int wi = segs[i].wire, wj = segs[j].wire;
            if (wi == wj) wr[static_cast<std::size_t>(wi)] += c.sign;
            else raw[static_cast<std::size_t>(wi)][static_cast<std::size_t>(wj)] += c.sign;
        }
    }
    t.degenerate = degenerate;
    t.writhe = std::move(wr);
    t.raw = std::move(raw);
    return t;
}

LinkingReport run_oracle(const std::vector<Polyline3>& wires, bool parallel) {
    // deterministic shear schedule; retry until the projection is generic
    static const std::pair<int, int> shears[] = {{0, 0}, {1, 0}, {0, 1}, {1, 1},
                                                 {2, 1}, {1, 2}, {3, 1}, {1, 3}};
    for (int attempt = 0; attempt < 8; ++attempt) {
        Rat lam(shears[attempt].first, 7);
        Rat mu(shears[attempt].second, 13);
        Projection pr = project(wires, lam, mu);
        Tally t = tally_crossings(wires.size(), pr, parallel);
        if (t.degenerate) continue;

        std::size_t n = wires.size();
        LinkingReport rep;
        rep.lk.assign(n, std::vector<Int>(n, 0));
        rep.framing.resize(n);
        for (std::size_t i = 0; i < n; ++i) rep.framing[i] = t.writhe[i];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Int total = t.raw[i][j] + t.raw[j][i];
                if (total % 2 != 0)
                    throw DegenerateProjection("odd crossing parity between closed wires");
                rep.lk[i][j] = rep.lk[j][i] = total / 2;
            }
        Int h = 0;
        for (std::size_t i = 0; i < n; ++i) {
            h = checked_add(h, checked_mul(rep.framing[i],
                                           checked_mul(wires[i].multiplicity, wires[i].multiplicity)));
            for (std::size_t j = i + 1; j < n; ++j)
                h = checked_add(h, 2 * checked_mul(rep.lk[i][j],
                                                   checked_mul(wires[i].multiplicity, wires[j].multiplicity)));
        }
        rep.total_hopf = h;
        return rep;
    }
    throw DegenerateProjection("no generic projection found after 8 shears");
}

} // namespace

LinkingReport linking_oracle(const std::vector<Polyline3>& wires) { return run_oracle(wires, true); }
LinkingReport linking_oracle_serial(const std::vector<Polyline3>& wires) { return run_oracle(wires, false); }

// ---------------------------------------------------------------------------
// Canonical realizations
// ---------------------------------------------------------------------------

namespace {
std::array<Rat, 3> pt(Int x, Int y, Int z) { return {Rat(x), Rat(y), Rat(z)}; }
std::array<Rat, 3> ptr(Rat x, Rat y, Rat z) { return {std::move(x), std::move(y), std::move(z)}; }
} // namespace

std::vector<Polyline3> hopf_pair_polylines(Int a, Int b) {
    // diamond in the z=0 plane around the origin
    Polyline3 c1;
    c1.points = {pt(2, 0, 0), pt(0, 2, 0), pt(-2, 0, 0), pt(0, -2, 0)};
    c1.multiplicity = a;
    // diamond in the y=0 plane threading the first one (oriented so the
    // oracle reports +2ab)
    Polyline3 c2;
    c2.points = {pt(3, 0, 0), pt(1, 0, -2), pt(-1, 0, 0), pt(1, 0, 2)};
    c2.multiplicity = b;
    return {std::move(c1), std::move(c2)};
}

/// Closed braid in the (x, y) diagram plane with z as depth. Strand at
/// bottom position s (1-based) runs to top position perm(s); each strand's
/// depth is constant ((d+1-s)/8, so the left-starting strand passes over,
/// making every crossing positive). Closure arcs are nested Cs around the
/// right side of the diagram and cross nothing.
static std::vector<Polyline3> closed_braid(const std::vector<Int>& perm) {
    Int d = static_cast<Int>(perm.size());
    std::vector<bool> used(static_cast<std::size_t>(d), false);
    std::vector<Polyline3> out;
    auto depth_of = [&](Int s) { return Rat(d + 1 - s, 8); }; // s is 1-based
    for (Int start = 0; start < d; ++start) {
        if (used[static_cast<std::size_t>(start)]) continue;
        Polyline3 wire;
        Int cur = start;
        do {
            used[static_cast<std::size_t>(cur)] = true;
            Int to = perm[static_cast<std::size_t>(cur)];
            Int s = cur + 1, p = to + 1; // 1-based positions
            Rat zleg = depth_of(s);
            // braid leg
            wire.points.push_back(ptr(Rat(s), Rat(0), zleg));
            wire.points.push_back(ptr(Rat(p), Rat(4), zleg));
            // nested C-shaped return at ring (d - p)
            Rat ring(d - p);
            Rat ztop = zleg;
            Rat zbot = depth_of(p); // depth of the next leg
            wire.points.push_back(ptr(Rat(p), Rat(5) + ring, ztop));
            wire.points.push_back(ptr(Rat(d + 1) + ring, Rat(5) + ring, ztop));
            wire.points.push_back(ptr(Rat(d + 1) + ring, Rat(-1) - ring, zbot));
            wire.points.push_back(ptr(Rat(p), Rat(-1) - ring, zbot));
            wire.points.push_back(ptr(Rat(p), Rat(0), zbot));
            cur = to;
        } while (cur != start);
        wire.points.pop_back(); // closure duplicates the loop start
        wire.multiplicity = 1;
        out.push_back(std::move(wire));
    }
    return out;
}

std::vector<Polyline3> twisted_strands_polylines(Int d) {
    if (d < 1) return {};
    std::vector<Int> perm(static_cast<std::size_t>(d));
    for (Int i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = d - 1 - i; // half turn
    return closed_braid(perm);
}

std::vector<Polyline3> swap_polylines(Int d1, Int d2) {
    std::vector<Int> perm(static_cast<std::size_t>(d1 + d2));
    for (Int i = 0; i < d1; ++i) perm[static_cast<std::size_t>(i)] = i + d2;
    for (Int i = 0; i < d2; ++i) perm[static_cast<std::size_t>(d1 + i)] = i;
    return closed_braid(perm);
}

} // namespace hopflink
