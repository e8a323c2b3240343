#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hopflink/link_types.hpp"

namespace hopflink {

struct MoveTrace;

/// One certified rewrite event. `before` and `after` are full expression
/// snapshots; every step conserves the Hopf invariant and charges a length
/// cost. A step may be a parallel batch: `children` then holds independent
/// sub-traces acting on disjoint regions, and the step's cost is the maximum
/// of the children's totals (homotopy length of simultaneous homotopies).
struct MoveStep {
    std::string move_name;
    LinkExpression before;
    LinkExpression after;
    Rat cost;
    Int hopf_before = 0;
    Int hopf_after = 0;
    /// Compact operand record (indices, degrees, iteration state) used by the
    /// verifier to replay the move deterministically.
    std::vector<Int> args;
    std::vector<MoveTrace> children;
};

/// Append-only sequential log of steps; total_cost is the exact rational sum
/// of the step costs. `initial`/`final_state` carry the endpoints when the
/// trace rides inside a parallel batch step (top-level endpoints are passed
/// to verify_trace explicitly).
struct MoveTrace {
    std::vector<MoveStep> steps;
    Rat total_cost{0};
    LinkExpression initial;
    LinkExpression final_state;

    void append(MoveStep s) {
        total_cost += s.cost;
        steps.push_back(std::move(s));
    }
    void splice(MoveTrace t) {
        for (auto& s : t.steps) append(std::move(s));
    }
    bool empty() const { return steps.empty(); }
};

/// Outcome of replaying a trace: ok, or the path to the first failing step
/// and which check (a: legality, b: Hopf conservation, c: cost model,
/// d: endpoint chaining) broke.
struct VerifyReport {
    bool ok = true;
    std::string check;           // "a", "b", "c", or "d"
    std::vector<int> step_path;  // indices into nested traces
    std::string detail;

    static VerifyReport pass() { return {}; }
    static VerifyReport fail(std::string check_, std::vector<int> path, std::string detail_) {
        VerifyReport r;
        r.ok = false;
        r.check = std::move(check_);
        r.step_path = std::move(path);
        r.detail = std::move(detail_);
        return r;
    }
    std::string to_string() const;
};

inline std::string VerifyReport::to_string() const {
    if (ok) return "ok";
    std::string p;
    for (std::size_t i = 0; i < step_path.size(); ++i) {
        if (i) p += ".";
        p += std::to_string(step_path[i]);
    }
    return "check (" + check + ") failed at step " + p + ": " + detail;
}

} // namespace hopflink
