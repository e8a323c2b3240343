#include <algorithm>
#include <optional>

#include "calculus_internal.hpp"
#include "calculus_rounds.hpp"
#include "hopflink/coarsening.hpp"
#include "hopflink/link_calculus.hpp"

// Trace replay. Every step is recomputed from its recorded operands by the
// same state machines that built it; any drift in legality (a), Hopf
// conservation (b), declared cost (c) or chaining (d) is reported with the
// step path.

namespace hopflink {

namespace {

using Terms = std::vector<SignedTerm>;

Terms sorted_terms(const LinkExpression& e) {
    Terms t = e.terms;
    std::sort(t.begin(), t.end(), term_less);
    return t;
}

bool remove_subset(Terms& state, const Terms& consumed) {
    Terms out;
    std::size_t i = 0;
    for (const auto& c : consumed) {
        bool found = false;
        while (i < state.size()) {
            if (state[i] == c) {
                found = true;
                ++i;
                break;
            }
            if (term_less(c, state[i])) break;
            out.push_back(state[i]);
            ++i;
        }
        if (!found) return false;
    }
    out.insert(out.end(), state.begin() + static_cast<std::ptrdiff_t>(i), state.end());
    state = std::move(out);
    return true;
}

void insert_terms(Terms& state, const Terms& produced) {
    state.insert(state.end(), produced.begin(), produced.end());
    std::sort(state.begin(), state.end(), term_less);
}

struct StepCheck {
    LinkExpression expect_after;
    Rat expect_cost;
};

Rat size_cost(const CostModel& m, const LinkExpression& involved) {
    return m.kappa * Rat(size_of(involved));
}

BalancedLink args_link(const std::vector<Int>& a, std::size_t at) {
    return BalancedLink{a.at(at), a.at(at + 1), a.at(at + 2), a.at(at + 3)};
}

detail::BalState args_bal_state(const std::vector<Int>& a) {
    return detail::BalState{a.at(0), a.at(1), a.at(2), a.at(3)};
}

std::optional<Int> unit_value(const SignedTerm& st) {
    if (const auto* u = std::get_if<UnitLoop>(&st.term)) return st.sign * u->eps;
    return std::nullopt;
}

/// Recomputes what a step must produce and charge. Throws calculus errors on
/// malformed operands; returns nullopt for unknown move names.
std::optional<StepCheck> replay_step(const MoveStep& s, const CostModel& model) {
    const LinkExpression before{s.before};
    const auto& args = s.args;
    StepCheck out;

    auto standards = [&]() {
        std::vector<const StandardLink*> v;
        for (const auto& st : before.terms) v.push_back(std::get_if<StandardLink>(&st.term));
        return v;
    };

    if (s.move_name == "merge_parallel") {
        auto v = standards();
        if (before.terms.size() != 2 || !v[0] || !v[1]) throw MismatchedMove("merge needs two standard terms");
        if (v[0]->b != v[1]->b || before.terms[0].sign != before.terms[1].sign)
            throw MismatchedMove("merge operands incompatible");
        out.expect_after.add(before.terms[0].sign, StandardLink{checked_add(v[0]->a, v[1]->a), v[0]->b});
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "shift_double") {
        auto v = standards();
        if (before.terms.size() != 1 || !v[0]) throw MismatchedMove("shift needs one standard term");
        int dir = args.at(0) >= 0 ? +1 : -1;
        if (dir > 0) {
            if (v[0]->a % 2 != 0) throw ParityError("shift: odd first degree");
            out.expect_after.add(before.terms[0].sign, StandardLink{v[0]->a / 2, 2 * v[0]->b});
        } else {
            if (v[0]->b % 2 != 0) throw ParityError("shift: odd second degree");
            out.expect_after.add(before.terms[0].sign, StandardLink{2 * v[0]->a, v[0]->b / 2});
        }
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "transfer_unit") {
        if (before.terms.size() != 2) throw MismatchedMove("transfer needs two terms");
        Int d = args.at(0), a = args.at(1), b = args.at(2), c = args.at(3);
        int si = 0, sj = 0;
        bool found_main = false, found_carry = false;
        for (const auto& st : before.terms) {
            const auto* l = std::get_if<StandardLink>(&st.term);
            if (!l) throw MismatchedMove("transfer operands must be standard");
            if (!found_main && l->a == a && l->b == b) {
                si = st.sign;
                found_main = true;
            } else if (l->a == c && l->b == 1) {
                sj = st.sign;
                found_carry = true;
            }
        }
        if (!found_main || !found_carry) throw MismatchedMove("transfer operands do not match args");
        out.expect_after.add(si, StandardLink{a, b + d});
        out.expect_after.add(sj, StandardLink{c - d * si * sj * a, 1});
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "transpose") {
        auto v = standards();
        if (before.terms.size() != 1 || !v[0]) throw MismatchedMove("transpose needs one standard term");
        out.expect_after.add(before.terms[0].sign, StandardLink{v[0]->b, v[0]->a});
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "unit_pair") {
        if (before.terms.size() != 2) throw MismatchedMove("unit_pair needs two units");
        auto v0 = unit_value(before.terms[0]), v1 = unit_value(before.terms[1]);
        if (!v0 || !v1 || *v0 != *v1 || (*v0 != 1 && *v0 != -1))
            throw MismatchedMove("unit_pair operands invalid");
        out.expect_after.add(+1, StandardLink{*v0, 1});
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "unit_cancel") {
        if (before.terms.size() != 2) throw MismatchedMove("unit_cancel needs two units");
        auto v0 = unit_value(before.terms[0]), v1 = unit_value(before.terms[1]);
        if (!v0 || !v1 || *v0 + *v1 != 0 || *v0 == 0) throw MismatchedMove("unit_cancel operands invalid");
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "unit_drop") {
        if (before.terms.size() != 1) throw MismatchedMove("unit_drop needs one unit");
        auto v0 = unit_value(before.terms[0]);
        if (!v0 || *v0 != 0) throw MismatchedMove("unit_drop needs a zero unit");
        out.expect_cost = Rat(0);
        return out;
    }
    if (s.move_name == "shape_init") {
        detail::BalState st = args_bal_state(args);
        // the consumed expression must be exactly the declared a|b (+ c|1)
        // (+ unit) input, with omitted parts zero
        bool main_seen = false, c_seen = false, unit_seen = false;
        for (const auto& term : before.terms) {
            if (term.sign != +1) throw MismatchedMove("shape_init input must be positive");
            if (const auto* l = std::get_if<StandardLink>(&term.term)) {
                if (!main_seen && l->a == st.a && l->b == st.b) main_seen = true;
                else if (!c_seen && l->a == st.c && l->b == 1) c_seen = true;
                else throw MismatchedMove("shape_init operand mismatch");
            } else if (const auto* u = std::get_if<UnitLoop>(&term.term)) {
                if (unit_seen || u->eps != st.eps) throw MismatchedMove("shape_init unit mismatch");
                unit_seen = true;
            } else {
                throw MismatchedMove("shape_init handles standard/unit terms only");
            }
        }
        if (!main_seen || (!c_seen && st.c != 0) || (!unit_seen && st.eps != 0))
            throw MismatchedMove("shape_init operands incomplete");
        out.expect_after = detail::bal_state_expr(st);
        out.expect_cost = Rat(0);
        return out;
    }
    if (s.move_name == "reduce_excess") {
        detail::BalState st = args_bal_state(args);
        if (!same_term_multiset(before, detail::bal_state_expr(st)))
            throw MismatchedMove("reduce_excess operands do not match args");
        Int k = detail::reduce_excess_count(st);
        if (k < 1) throw MismatchedMove("reduce_excess without excess");
        out.expect_after = detail::bal_state_expr(detail::reduce_excess_apply(st));
        out.expect_cost = model.kappa * Rat(k, 8);
        return out;
    }
    if (s.move_name == "balance_round") {
        detail::BalState st = args_bal_state(args);
        if (!same_term_multiset(before, detail::bal_state_expr(st)))
            throw MismatchedMove("balance_round operands do not match args");
        if (st.a < 2) throw MismatchedMove("balance_round needs a >= 2");
        out.expect_after = detail::bal_state_expr(detail::balance_round_apply(st));
        out.expect_cost = model.kappa * sqrt_upper(Rat(st.a));
        return out;
    }
    if (s.move_name == "final_adjust") {
        detail::BalState st = args_bal_state(args);
        if (!same_term_multiset(before, detail::bal_state_expr(st)))
            throw MismatchedMove("final_adjust operands do not match args");
        auto adj = detail::final_adjust_apply(st);
        out.expect_after = detail::bal_state_expr(adj.end);
        out.expect_cost = model.kappa * sqrt_upper(Rat(adj.max_seen + 1));
        return out;
    }
    if (s.move_name == "tidy") {
        for (const auto& st : before.terms) {
            if (const auto* l = std::get_if<StandardLink>(&st.term)) {
                if (l->a != 0) throw MismatchedMove("tidy may drop only zero links");
            } else if (auto v = unit_value(st); !v || *v != 0) {
                throw MismatchedMove("tidy may drop only zero terms");
            }
        }
        out.expect_cost = Rat(0);
        return out;
    }
    if (s.move_name == "insert_pair" || s.move_name == "seed_insert") {
        if (!before.terms.empty()) throw MismatchedMove("insert consumes nothing");
        BalancedLink l = args_link(args, 0);
        if (!is_balanced(l)) throw MismatchedMove("insert requires a balanced link");
        out.expect_after = concat_expressions(balanced_to_expression(l, -1), balanced_to_expression(l, +1));
        out.expect_cost = s.move_name == "insert_pair" ? model.kappa * Rat(size_of(l))
                                                       : model.kappa * Rat(2);
        return out;
    }
    if (s.move_name == "cancel_normalize") {
        int sx = static_cast<int>(args.at(0));
        BalancedLink x = args_link(args, 1);
        int sy = static_cast<int>(args.at(5));
        BalancedLink y = args_link(args, 6);
        auto shape_ok = [](const BalancedLink& l) {
            return l.a >= 0 && l.b >= 0 && l.c >= 0 && l.eps >= -1 && l.eps <= 1;
        };
        if (!shape_ok(x) || !shape_ok(y)) throw MismatchedMove("cancel operands malformed");
        LinkExpression expect_before =
            concat_expressions(balanced_to_expression(x, sx), balanced_to_expression(y, -sy));
        if (!same_term_multiset(before, expect_before))
            throw MismatchedMove("cancel_normalize operands do not match args");
        detail::CancelState st;
        st.a1 = sx * x.a; st.b1 = x.b;
        st.a2 = sy * y.a; st.b2 = y.b;
        st.c = sx * x.c - sy * y.c;
        st.eps = sx * x.eps - sy * y.eps;
        while (st.eps >= 2) { st.eps -= 2; st.c += 1; }
        while (st.eps <= -2) { st.eps += 2; st.c -= 1; }
        out.expect_after = detail::cancel_state_expr(st);
        out.expect_cost = model.kappa * Rat(1, 4);
        return out;
    }
    if (s.move_name == "cancel_round") {
        detail::CancelState st{args.at(0), args.at(1), args.at(2), args.at(3), args.at(4), args.at(5)};
        if (!same_term_multiset(before, detail::cancel_state_expr(st)))
            throw MismatchedMove("cancel_round operands do not match args");
        out.expect_after = detail::cancel_state_expr(detail::cancel_round_apply(st));
        out.expect_cost = model.kappa * sqrt_upper(Rat(detail::cancel_scale(st)));
        return out;
    }
    if (s.move_name == "base_certificate") {
        Int bound = args.at(0);
        if (bound != model.B && bound != 10) throw MismatchedMove("base certificate bound unknown");
        if (hopf_invariant(before) != 0) throw HopfMismatch("base certificate requires Hopf 0");
        Int scale = 0;
        for (const auto& st : before.terms)
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, StandardLink>) {
                        scale = std::max({scale, std::abs(v.a), std::abs(v.b)});
                    } else if constexpr (std::is_same_v<T, UnitLoop>) {
                        scale = std::max(scale, std::abs(v.eps));
                    } else if constexpr (std::is_same_v<T, TwistedLink>) {
                        scale = std::max(scale, v.d);
                    } else if constexpr (std::is_same_v<T, InterlockedLink>) {
                        scale = std::max(scale, v.n);
                        for (Int q : v.a) scale = std::max(scale, q);
                        for (Int q : v.b) scale = std::max(scale, q);
                    } else {
                        for (auto [d1, d2] : v.swaps) scale = std::max({scale, d1, d2});
                    }
                },
                st.term);
        if (scale >= bound) throw MismatchedMove("base certificate parameters too large");
        out.expect_cost = model.kappa * sqrt_upper(Rat(scale + 1));
        return out;
    }
    if (s.move_name == "split_balanced") {
        BalancedLink x = args_link(args, 0), t = args_link(args, 4), y = args_link(args, 8);
        if (!is_balanced(x) || !is_balanced(t) || !is_balanced(y))
            throw MismatchedMove("split_balanced operands not balanced");
        if (hopf_invariant(x) != checked_add(hopf_invariant(t), hopf_invariant(y)))
            throw HopfMismatch("split_balanced invariant mismatch");
        if (!same_term_multiset(before, balanced_to_expression(x)))
            throw MismatchedMove("split_balanced operand mismatch");
        out.expect_after = concat_expressions(balanced_to_expression(t), balanced_to_expression(y));
        out.expect_cost = model.kappa * Rat(size_of(x));
        return out;
    }
    if (s.move_name == "merge_balanced") {
        BalancedLink t1 = args_link(args, 0), t2 = args_link(args, 4), tgt = args_link(args, 8);
        if (!is_balanced(t1) || !is_balanced(t2) || !is_balanced(tgt))
            throw MismatchedMove("merge_balanced operands not balanced");
        if (checked_add(hopf_invariant(t1), hopf_invariant(t2)) != hopf_invariant(tgt))
            throw HopfMismatch("merge_balanced invariant mismatch");
        LinkExpression expect_before =
            concat_expressions(balanced_to_expression(t1), balanced_to_expression(t2));
        if (!same_term_multiset(before, expect_before))
            throw MismatchedMove("merge_balanced operand mismatch");
        out.expect_after = balanced_to_expression(tgt);
        out.expect_cost = model.kappa * Rat(size_of(tgt));
        return out;
    }
    if (s.move_name == "fold_remainder") {
        BalancedLink tgt = args_link(args, 0);
        if (!is_balanced(tgt)) throw MismatchedMove("fold target not balanced");
        for (const auto& st : before.terms)
            if (!std::holds_alternative<StandardLink>(st.term) && !std::holds_alternative<UnitLoop>(st.term))
                throw MismatchedMove("fold consumes only standard/unit terms");
        if (hopf_invariant(before) != hopf_invariant(tgt))
            throw HopfMismatch("fold invariant mismatch");
        out.expect_after = balanced_to_expression(tgt);
        out.expect_cost = model.kappa * Rat(std::max<Int>(size_of(tgt), 1));
        return out;
    }
    if (s.move_name == "twist_convert") {
        if (before.terms.size() != 1) throw MismatchedMove("twist_convert needs one term");
        const auto* tw = std::get_if<TwistedLink>(&before.terms[0].term);
        if (!tw || tw->d != args.at(0)) throw MismatchedMove("twist_convert operand mismatch");
        if (tw->d < 0) throw PreconditionError("twisted degree negative");
        out.expect_after = hopf_detail::twist_expansion(tw->d, before.terms[0].sign);
        out.expect_cost = model.kappa * Rat(size_of(before.terms[0].term));
        return out;
    }
    if (s.move_name == "swap_convert") {
        if (before.terms.size() != 1) throw MismatchedMove("swap_convert needs one term");
        const auto* sc = std::get_if<SwapCables>(&before.terms[0].term);
        if (!sc) throw MismatchedMove("swap_convert needs a swap bundle");
        int sgn = before.terms[0].sign;
        for (auto [d1, d2] : sc->swaps) {
            if (d1 < 1 || d2 < 1) throw PreconditionError("swap blocks must be nonempty");
            out.expect_after.add(sgn, TwistedLink{d1 + d2});
            out.expect_after.add(-sgn, TwistedLink{d1});
            out.expect_after.add(-sgn, TwistedLink{d2});
        }
        out.expect_cost = size_cost(model, before);
        return out;
    }
    if (s.move_name == "interlocked_split") {
        BalancedLink partner = args_link(args, 0);
        const InterlockedLink* inter = nullptr;
        for (const auto& st : before.terms)
            if (const auto* il = std::get_if<InterlockedLink>(&st.term)) {
                if (st.sign != +1) throw MismatchedMove("interlocked term must be positive");
                inter = il;
            }
        if (!inter) throw MismatchedMove("interlocked_split needs an interlocked term");
        auto [pairs, trace] = split_interlocked_step(*inter, partner);
        if (trace.steps.size() != 1) throw calculus_error("internal split replay");
        if (!same_term_multiset(before, trace.steps[0].before))
            throw MismatchedMove("interlocked_split operand mismatch");
        out.expect_after = trace.steps[0].after;
        out.expect_cost = trace.steps[0].cost;
        return out;
    }
    if (s.move_name == "interlocked_recursion") {
        int term_sign = static_cast<int>(args.at(0));
        int partner_sign = static_cast<int>(args.at(1));
        BalancedLink partner = args_link(args, 2);
        const InterlockedLink* inter = nullptr;
        for (const auto& st : before.terms)
            if (const auto* il = std::get_if<InterlockedLink>(&st.term)) {
                if (st.sign != term_sign) throw MismatchedMove("interlocked sign mismatch");
                inter = il;
            }
        if (!inter) throw MismatchedMove("recursion needs an interlocked term");
        LinkExpression expect_before;
        expect_before.add(term_sign, *inter);
        auto pe = balanced_to_expression(partner, -term_sign * partner_sign);
        expect_before.terms.insert(expect_before.terms.end(), pe.terms.begin(), pe.terms.end());
        if (!same_term_multiset(before, expect_before))
            throw MismatchedMove("recursion operand mismatch");
        out.expect_cost = hopf_detail::interlocked_recursion_cost(*inter, partner_sign, partner, model);
        return out;
    }
    if (s.move_name == "link_normalize") {
        if (before.terms.size() != 1) throw MismatchedMove("normalize needs one term");
        const auto& st = before.terms[0];
        if (!std::holds_alternative<StandardLink>(st.term) && !std::holds_alternative<UnitLoop>(st.term))
            throw MismatchedMove("normalize handles standard/unit terms");
        Int h = st.sign * hopf_invariant(st.term);
        auto [g, l] = canonical_balanced(h);
        out.expect_after = balanced_to_expression(l, g);
        Int scale = size_of(st.term);
        out.expect_cost = model.kappa * model.C_bal * sqrt_upper(Rat(scale * scale + 1));
        return out;
    }
    if (s.move_name == "merge_links") {
        int s1 = static_cast<int>(args.at(0));
        BalancedLink l1 = args_link(args, 1);
        int s2 = static_cast<int>(args.at(5));
        BalancedLink l2 = args_link(args, 6);
        if (!is_balanced(l1) || !is_balanced(l2)) throw MismatchedMove("merge_links operands not balanced");
        LinkExpression expect_before =
            concat_expressions(balanced_to_expression(l1, s1), balanced_to_expression(l2, s2));
        if (!same_term_multiset(before, expect_before))
            throw MismatchedMove("merge_links operand mismatch");
        Int h = checked_add(s1 * hopf_invariant(l1), s2 * hopf_invariant(l2));
        auto [g, l] = canonical_balanced(h);
        out.expect_after = balanced_to_expression(l, g);
        out.expect_cost =
            model.kappa * Rat(std::max<Int>({size_of(l1), size_of(l2), size_of(l)}) + 1);
        return out;
    }
    if (s.move_name == "clutching_null") {
        ClutchingDescriptor d = ClutchingDescriptor::decode(args);
        LinkExpression start = clutching_start_expression(d);
        if (!same_term_multiset(before, start))
            throw MismatchedMove("clutching start expression mismatch");
        out.expect_cost = clutching_cost(d, model);
        return out;
    }
    return std::nullopt;
}

VerifyReport verify_rec(const LinkExpression& initial, const MoveTrace& trace,
                        const LinkExpression& final_expr, const CostModel& model,
                        std::vector<int>& path) {
    Terms state = sorted_terms(initial);
    Rat running(0);

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        path.push_back(static_cast<int>(i));
        const MoveStep& s = trace.steps[i];

        if (s.move_name == "parallel_blocks") {
            // children act on disjoint sub-expressions simultaneously
            LinkExpression union_before, union_after;
            Rat maxcost(0);
            for (std::size_t c = 0; c < s.children.size(); ++c) {
                const MoveTrace& child = s.children[c];
                path.push_back(static_cast<int>(c));
                VerifyReport sub = verify_rec(child.initial, child, child.final_state, model, path);
                if (!sub.ok) return sub;
                path.pop_back();
                union_before.terms.insert(union_before.terms.end(), child.initial.terms.begin(),
                                          child.initial.terms.end());
                union_after.terms.insert(union_after.terms.end(), child.final_state.terms.begin(),
                                         child.final_state.terms.end());
                if (child.total_cost > maxcost) maxcost = child.total_cost;
            }
            if (!same_term_multiset(union_before, s.before) || !same_term_multiset(union_after, s.after))
                return VerifyReport::fail("a", path, "batch endpoints do not match the children");
            if (s.cost != maxcost)
                return VerifyReport::fail("c", path, "batch cost must be the max of its children");
        } else {
            std::optional<StepCheck> check;
            try {
                check = replay_step(s, model);
            } catch (const std::exception& err) {
                // malformed operands (including truncated args) are legality
                // failures, never crashes
                return VerifyReport::fail("a", path, err.what());
            }
            if (!check) return VerifyReport::fail("a", path, "unknown move: " + s.move_name);
            if (!same_term_multiset(check->expect_after, s.after))
                return VerifyReport::fail("a", path, s.move_name + " output does not replay");
            if (s.cost != check->expect_cost)
                return VerifyReport::fail("c", path,
                                          s.move_name + " cost " + s.cost.str() + " != model " +
                                              check->expect_cost.str());
        }

        Int hb = hopf_invariant(s.before);
        Int ha = hopf_invariant(s.after);
        if (hb != ha || hb != s.hopf_before || ha != s.hopf_after)
            return VerifyReport::fail("b", path, "Hopf invariant not conserved");

        Terms consumed = sorted_terms(s.before);
        if (!remove_subset(state, consumed))
            return VerifyReport::fail("d", path, "consumed terms absent from the working expression");
        insert_terms(state, sorted_terms(s.after));
        running += s.cost;
        path.pop_back();
    }

    if (running != trace.total_cost) {
        path.push_back(static_cast<int>(trace.steps.size()));
        return VerifyReport::fail("c", path, "trace total_cost is not the sum of step costs");
    }
    Terms fin = sorted_terms(final_expr);
    if (state != fin) {
        path.push_back(static_cast<int>(trace.steps.size()));
        return VerifyReport::fail("d", path, "final expression does not match the trace");
    }
    return VerifyReport::pass();
}

} // namespace

VerifyReport verify_trace(const LinkExpression& initial, const MoveTrace& trace,
                          const LinkExpression& final_expr, const CostModel& model) {
    std::vector<int> path;
    return verify_rec(initial, trace, final_expr, model, path);
}

} // namespace hopflink
