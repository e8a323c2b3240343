#include "hopflink/cable_geometry.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hopflink {

std::string CableReport::to_string() const {
    if (ok) return "ok";
    std::string s = what;
    if (stripe_i >= 0) s += " (stripe " + std::to_string(stripe_i);
    if (stripe_j >= 0) s += " vs " + std::to_string(stripe_j);
    if (stripe_i >= 0) s += ", alpha=" + alpha.str() + ")";
    return s;
}

namespace {

// overlap beyond this slack counts as a violation; exact touching is fine
const Rat kSlack(1, 16);

struct Box {
    Rat x1, x2, y1, y2;
};

Box stripe_box(const StripeSpec& s, std::size_t k) {
    const auto& v = s.path[k];
    return Box{v[0], v[0] + Rat(s.width), v[1], v[1] + Rat(1)};
}

bool boxes_overlap(const Box& a, const Box& b) {
    Rat ox = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    Rat oy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return ox > kSlack && oy > kSlack;
}

} // namespace

CableReport validate_cable(const AbstractCableSpec& c, std::optional<Rat> speed_bound) {
    CableReport r;
    auto fail = [&](std::string what, Int i = -1, Int j = -1, Rat alpha = Rat(0)) {
        r.ok = false;
        r.what = std::move(what);
        r.stripe_i = i;
        r.stripe_j = j;
        r.alpha = std::move(alpha);
        return r;
    };

    if (c.n < 1 || c.K < 2) return fail("cable must have n >= 1 and K >= 2");
    Int total_width = 0;
    for (const auto& s : c.stripes) {
        if (s.width < 1) return fail("stripe width must be positive");
        total_width += s.width;
    }
    if (static_cast<Int>(c.stripes.size()) > c.K * c.n) return fail("more than K*n stripes");
    if (total_width > c.K * c.n) return fail("total stripe width exceeds K*n");
    if (c.stripes.empty()) return r;

    std::size_t m = c.stripes[0].path.size();
    if (m < 1) return fail("stripe with empty path");
    for (const auto& s : c.stripes)
        if (s.path.size() != m) return fail("stripes sampled at different resolutions");
    if (Rat(static_cast<Int>(m) - 1) * c.h != c.length)
        return fail("sample count does not match length/h");

    Rat bound = speed_bound.value_or(c.V);
    Rat step_budget = bound * c.h;
    Rat Kn(c.K * c.n);
    Rat n(c.n);

    for (std::size_t k = 0; k < m; ++k) {
        Rat alpha = Rat(static_cast<Int>(k)) * c.h;
        bool is_end = (k == 0 || k + 1 == m);
        for (std::size_t i = 0; i < c.stripes.size(); ++i) {
            Box bi = stripe_box(c.stripes[i], k);
            if (bi.x1 < Rat(0) || bi.x2 > Kn || bi.y1 < Rat(0) || bi.y2 > Kn)
                return fail("stripe leaves [0,Kn]^2", static_cast<Int>(i), -1, alpha);
            if (is_end && (bi.x1 < Rat(0) || bi.x2 > n || bi.y1 < Rat(0) || bi.y2 > n))
                return fail("stripe end outside [0,n]^2", static_cast<Int>(i), -1, alpha);
            if (k + 1 < m) {
                const auto& v0 = c.stripes[i].path[k];
                const auto& v1 = c.stripes[i].path[k + 1];
                Rat dx = v1[0] - v0[0], dy = v1[1] - v0[1];
                if (dx * dx + dy * dy > step_budget * step_budget)
                    return fail("stripe path exceeds Lipschitz bound", static_cast<Int>(i), -1, alpha);
            }
            for (std::size_t j = i + 1; j < c.stripes.size(); ++j) {
                Box bj = stripe_box(c.stripes[j], k);
                if (boxes_overlap(bi, bj))
                    return fail("stripes overlap", static_cast<Int>(i), static_cast<Int>(j), alpha);
                const auto& vi = c.stripes[i].path[k];
                const auto& vj = c.stripes[j].path[k];
                bool stacked = vi[1] + Rat(1) <= vj[1];
                bool rowwise = vi[0] <= vj[0] && vi[1] <= vj[1];
                if (!stacked && !rowwise)
                    return fail("order condition violated", static_cast<Int>(i), static_cast<Int>(j), alpha);
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// comb
// ---------------------------------------------------------------------------

namespace {

/// Piecewise-linear evaluation of a sampled path at an off-grid parameter.
Vec2R eval_path(const StripeSpec& s, const Rat& h, const Rat& alpha) {
    Rat idx = alpha / h;
    Int lo = idx.num() / idx.den(); // floor for nonnegative alpha
    std::size_t k = static_cast<std::size_t>(lo);
    if (k + 1 >= s.path.size()) return s.path.back();
    Rat frac = idx - Rat(lo);
    const auto& a = s.path[k];
    const auto& b = s.path[k + 1];
    return {a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])};
}

Rat clamp01(const Rat& x) {
    if (x < Rat(0)) return Rat(0);
    if (x > Rat(1)) return Rat(1);
    return x;
}

/// Freeze ramp: 0 on [0,a/4], linear up to 1 at a/2, symmetric.
Rat drag_weight(const Rat& alpha, const Rat& a) {
    Rat w1 = Rat(4) * alpha / a - Rat(1);
    Rat w2 = Rat(4) * (a - alpha) / a - Rat(1);
    return clamp01(std::min(w1, w2));
}

/// End-freezing reparametrization: constant on the outer quarters.
Rat rho(const Rat& alpha, const Rat& a) {
    Rat q = a / Rat(4);
    if (alpha <= q) return Rat(0);
    if (alpha >= a - q) return a;
    return Rat(2) * (alpha - q);
}

} // namespace

CableHomotopy comb(const AbstractCableSpec& c1, const AbstractCableSpec& c2) {
    if (c1.n != c2.n || c1.K != c2.K || c1.h != c2.h || c1.length != c2.length)
        throw PreconditionError("comb: cable headers differ");
    if (c1.stripes.size() != c2.stripes.size())
        throw PreconditionError("comb: stripe counts differ");
    for (std::size_t i = 0; i < c1.stripes.size(); ++i) {
        if (c1.stripes[i].width != c2.stripes[i].width)
            throw PreconditionError("comb: stripe widths differ");
        if (c1.stripes[i].path.front() != c2.stripes[i].path.front() ||
            c1.stripes[i].path.back() != c2.stripes[i].path.back())
            throw PreconditionError("comb: stripe ends differ");
    }
    if (Rat(c1.n) > c1.length) throw PreconditionError("comb: requires a >= n");

    const Rat a = c1.length;
    const Rat h = c1.h;
    const std::size_t m = c1.samples();
    const std::size_t ns = c1.stripes.size();

    // phase durations in unit time steps
    auto steps_of = [](const Rat& x) {
        Int q = x.num() / x.den();
        return std::max<Int>(1, q + (x.num() % x.den() != 0 ? 1 : 0));
    };
    Int ta = steps_of(a / Rat(4)); // freeze ends
    Int tb = steps_of(Rat(c1.n)); // drag to rows
    Int tc = steps_of(Rat(c1.n)); // interpolate

    // a stripe's position in a given phase, as a pure function of
    // (cable, stripe, sample, phase progress)
    auto frozen = [&](const AbstractCableSpec& c, std::size_t i, std::size_t k, const Rat& t) {
        Rat alpha = Rat(static_cast<Int>(k)) * h;
        Rat par = (Rat(1) - t) * alpha + t * rho(alpha, a);
        return eval_path(c.stripes[i], h, par);
    };
    auto dragged = [&](const AbstractCableSpec& c, std::size_t i, std::size_t k, const Rat& t) {
        Vec2R base = frozen(c, i, k, Rat(1));
        Rat alpha = Rat(static_cast<Int>(k)) * h;
        Rat w = drag_weight(alpha, a) * t;
        Rat target(static_cast<Int>(i));
        return Vec2R{base[0], base[1] + w * (target - base[1])};
    };

    CableHomotopy out;
    out.speed_bound = Rat(2) * c1.V + Rat(4 * c1.K);
    auto push_frame = [&](auto&& position) {
        AbstractCableSpec f = c1;
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t k = 0; k < m; ++k) f.stripes[i].path[k] = position(i, k);
        out.frames.push_back(std::move(f));
    };

    // forward: freeze c1, drag c1; bridge: interpolate dragged c1 -> dragged c2;
    // backward: undrag c2, unfreeze c2
    for (Int s = 0; s <= ta; ++s)
        push_frame([&](std::size_t i, std::size_t k) { return frozen(c1, i, k, Rat(s, ta)); });
    for (Int s = 1; s <= tb; ++s)
        push_frame([&](std::size_t i, std::size_t k) { return dragged(c1, i, k, Rat(s, tb)); });
    for (Int s = 1; s <= tc; ++s)
        push_frame([&](std::size_t i, std::size_t k) {
            Vec2R p = dragged(c1, i, k, Rat(1));
            Vec2R q = dragged(c2, i, k, Rat(1));
            Rat t(s, tc);
            return Vec2R{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
        });
    for (Int s = tb - 1; s >= 0; --s)
        push_frame([&](std::size_t i, std::size_t k) { return dragged(c2, i, k, Rat(s, tb)); });
    for (Int s = ta - 1; s >= 0; --s)
        push_frame([&](std::size_t i, std::size_t k) { return frozen(c2, i, k, Rat(s, ta)); });

    // exact endpoints
    out.frames.front() = c1;
    out.frames.back() = c2;

    // velocity audit (data-parallel over frames)
    std::size_t F = out.frames.size();
    std::vector<Rat> path_speed(F, Rat(0)), time_speed(F, Rat(0));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long fi = 0; fi < static_cast<long long>(F); ++fi) {
        auto f = static_cast<std::size_t>(fi);
        Rat ps(0), ts(0);
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t k = 0; k + 1 < m; ++k) {
                const auto& v0 = out.frames[f].stripes[i].path[k];
                const auto& v1 = out.frames[f].stripes[i].path[k + 1];
                Rat dx = (v1[0] - v0[0]) / h, dy = (v1[1] - v0[1]) / h;
                Rat sq = dx * dx + dy * dy;
                if (sq > ps * ps) ps = sqrt_upper(sq);
            }
            if (f + 1 < F) {
                for (std::size_t k = 0; k < m; ++k) {
                    const auto& v0 = out.frames[f].stripes[i].path[k];
                    const auto& v1 = out.frames[f + 1].stripes[i].path[k];
                    Rat dx = v1[0] - v0[0], dy = v1[1] - v0[1];
                    Rat sq = dx * dx + dy * dy;
                    if (sq > ts * ts) ts = sqrt_upper(sq);
                }
            }
        }
        path_speed[f] = ps;
        time_speed[f] = ts;
    }
    for (std::size_t f = 0; f < F; ++f) {
        out.max_path_speed = std::max(out.max_path_speed, path_speed[f]);
        out.max_time_speed = std::max(out.max_time_speed, time_speed[f]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// reshape
// ---------------------------------------------------------------------------

AbstractCableSpec reshape(const CrossSection& start, const CrossSection& end,
                          Int n, Int K, const Rat& h) {
    if (start.stripes.size() != end.stripes.size())
        throw PreconditionError("reshape: stripe counts differ");
    Rat bound_n(n);
    for (const auto& cs : {start, end})
        for (const auto& [w, v] : cs.stripes) {
            if (v[0] < Rat(0) || v[0] + Rat(w) > bound_n || v[1] < Rat(0) || v[1] + Rat(1) > bound_n)
                throw PreconditionError("reshape: cross-section outside [0,n]^2");
            if (v[1].den() != 1)
                throw PreconditionError("reshape: cross-section rows must be integral");
        }

    // wires are anonymous: pair the two cross-sections slot-by-slot in the
    // cable order (row, then column) and route each path through its own
    // x-lane while switching rows
    auto sorted = [](const CrossSection& cs) {
        auto v = cs.stripes;
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
            if (a.second[1] != b.second[1]) return a.second[1] < b.second[1];
            if (a.second[0] != b.second[0]) return a.second[0] < b.second[0];
            return a.first < b.first;
        });
        return v;
    };
    auto s0 = sorted(start);
    auto s1 = sorted(end);
    Int total_width = 0;
    for (std::size_t i = 0; i < s0.size(); ++i) {
        if (s0[i].first != s1[i].first) throw PreconditionError("reshape: incompatible widths");
        total_width += s0[i].first;
    }
    if (total_width > K * n) throw PreconditionError("reshape: stripes exceed the cable budget");

    AbstractCableSpec cable;
    cable.n = n;
    cable.K = K;
    cable.h = h;
    cable.V = Rat(1);
    cable.length = Rat(4 * n);
    if ((cable.length / h).den() != 1) throw PreconditionError("reshape: h must divide 4n");
    Int steps = (cable.length / h).num();

    if (s0 == s1) {
        // constant cable
        for (const auto& [w, pos] : s0) {
            StripeSpec s;
            s.width = w;
            s.path.assign(static_cast<std::size_t>(steps) + 1, pos);
            cable.stripes.push_back(std::move(s));
        }
        return cable;
    }

    Int slot = 0;
    for (std::size_t i = 0; i < s0.size(); ++i) {
        StripeSpec s;
        s.width = s0[i].first;
        Vec2R p0 = s0[i].second;
        Vec2R p1 = s1[i].second;
        Rat row(static_cast<Int>(i));
        Rat lane(slot);
        slot += s.width;
        Rat nn(n);
        for (Int k = 0; k <= steps; ++k) {
            Rat alpha = Rat(k) * h;
            Vec2R p;
            if (alpha <= nn) {
                // lift to the stripe's own row
                Rat t = alpha / nn;
                p = {p0[0], p0[1] + t * (row - p0[1])};
            } else if (alpha <= Rat(2 * n)) {
                // slide to a private x-lane
                Rat t = (alpha - nn) / nn;
                p = {p0[0] + t * (lane - p0[0]), row};
            } else if (alpha <= Rat(3 * n)) {
                // switch rows inside the lane
                Rat t = (alpha - Rat(2 * n)) / nn;
                p = {lane, row + t * (p1[1] - row)};
            } else {
                // settle into the end column
                Rat t = (alpha - Rat(3 * n)) / nn;
                p = {lane + t * (p1[0] - lane), p1[1]};
            }
            s.path.push_back(p);
        }
        cable.stripes.push_back(std::move(s));
    }

    // record the honest Lipschitz constant of the construction (the lane
    // slides move up to ~Kn over a phase of length n)
    Rat maxsq(0);
    for (const auto& s : cable.stripes)
        for (std::size_t k = 0; k + 1 < s.path.size(); ++k) {
            Rat dx = s.path[k + 1][0] - s.path[k][0];
            Rat dy = s.path[k + 1][1] - s.path[k][1];
            Rat sq = dx * dx + dy * dy;
            if (sq > maxsq) maxsq = sq;
        }
    Rat v(1);
    while ((v * h) * (v * h) < maxsq) v += Rat(1);
    cable.V = v;
    return cable;
}

// ---------------------------------------------------------------------------
// greedy striping
// ---------------------------------------------------------------------------

std::vector<Int> greedy_striping(const std::vector<Int>& start_rows,
                                 const std::vector<Int>& end_rows, Int L) {
    if (start_rows.size() != end_rows.size())
        throw SizeMismatch("greedy_striping: wire counts differ");
    auto check = [&](const std::vector<Int>& rows) {
        Int run = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] < 0 || rows[i] >= L) throw PreconditionError("row index out of range");
            if (i > 0 && rows[i] < rows[i - 1]) throw PreconditionError("rows must be nondecreasing");
            run = (i > 0 && rows[i] == rows[i - 1]) ? run + 1 : 1;
            if (run > L) throw PreconditionError("row longer than L");
        }
    };
    check(start_rows);
    check(end_rows);

    std::vector<Int> runs;
    for (std::size_t i = 0; i < start_rows.size(); ++i) {
        bool fresh = i == 0 || start_rows[i] != start_rows[i - 1] || end_rows[i] != end_rows[i - 1];
        if (fresh) runs.push_back(1);
        else runs.back() += 1;
    }
    if (static_cast<Int>(runs.size()) > 2 * L)
        throw calculus_error("greedy_striping: produced more than 2L stripes");
    return runs;
}

} // namespace hopflink
