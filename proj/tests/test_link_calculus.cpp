#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hopflink/link_calculus.hpp"

using namespace hopflink;

namespace {

LinkExpression standard_pair(Int a1, Int b1, Int a2, Int b2) {
    LinkExpression e;
    e.add(+1, StandardLink{a1, b1});
    e.add(+1, StandardLink{a2, b2});
    return e;
}

LinkExpression balance_input(Int a, Int b, Int c, Int eps = 0) {
    LinkExpression e;
    e.add(+1, StandardLink{a, b});
    e.add(+1, StandardLink{c, 1});
    if (eps != 0) e.add(+1, UnitLoop{eps});
    return e;
}

} // namespace

TEST_CASE("hopf invariant of the term kinds") {
    CHECK(hopf_invariant(LinkTerm{StandardLink{3, 5}}) == 30);
    CHECK(hopf_invariant(LinkTerm{StandardLink{0, 7}}) == 0);
    CHECK(hopf_invariant(LinkTerm{StandardLink{-3, 5}}) == -30);
    CHECK(hopf_invariant(LinkTerm{TwistedLink{4}}) == 6);
    CHECK(hopf_invariant(LinkTerm{TwistedLink{1}}) == 0);
    CHECK(hopf_invariant(LinkTerm{TwistedLink{0}}) == 0);
    CHECK(hopf_invariant(LinkTerm{UnitLoop{1}}) == 1);
    CHECK(hopf_invariant(LinkTerm{InterlockedLink{2, {1, 1}, {1, 1}}}) == 6);
    // worked example from the interlocked definition
    CHECK(hopf_invariant(LinkTerm{InterlockedLink{4, {8, 8, 8, 8}, {8, 8, 8, 8}}}) == 2 * 64 * 10);
}

TEST_CASE("sizes") {
    CHECK(size_of(LinkTerm{StandardLink{16, 4}}) == 4);
    CHECK(size_of(LinkTerm{StandardLink{17, 4}}) == 5);
    CHECK(size_of(LinkTerm{InterlockedLink{4, {8, 8, 8, 8}, {8, 8, 8, 8}}}) == 8);
    CHECK(size_of(LinkTerm{UnitLoop{1}}) == 1);
    CHECK(size_of(LinkExpression{}) == 0);
    LinkExpression e;
    e.add(+1, StandardLink{16, 4});
    CHECK(size_of(e) == 5); // one term: +ceil(log2 2)
}

TEST_CASE("merge_parallel") {
    auto [e, step] = merge_parallel(standard_pair(3, 5, 4, 5), 0, 1);
    REQUIRE(e.terms.size() == 1);
    CHECK(std::get<StandardLink>(e.terms[0].term) == StandardLink{7, 5});
    CHECK(hopf_invariant(e) == 70);
    CHECK(step.hopf_before == 70);

    auto [e2, s2] = merge_parallel(standard_pair(0, 3, 6, 3), 0, 1);
    CHECK(std::get<StandardLink>(e2.terms[0].term) == StandardLink{6, 3});

    CHECK_THROWS_AS(merge_parallel(standard_pair(2, 3, 2, 4), 0, 1), MismatchedMove);
}

TEST_CASE("shift_double both directions") {
    LinkExpression e;
    e.add(+1, StandardLink{16, 1});
    auto [f, step] = shift_double(e, 0, +1);
    CHECK(std::get<StandardLink>(f.terms[0].term) == StandardLink{8, 2});
    auto [g, step2] = shift_double(f, 0, -1);
    CHECK(std::get<StandardLink>(g.terms[0].term) == StandardLink{16, 1});

    LinkExpression z;
    z.add(+1, StandardLink{0, 5});
    auto [fz, sz] = shift_double(z, 0, +1);
    CHECK(std::get<StandardLink>(fz.terms[0].term) == StandardLink{0, 10});

    LinkExpression odd;
    odd.add(+1, StandardLink{3, 5});
    CHECK_THROWS_AS(shift_double(odd, 0, +1), ParityError);
}

TEST_CASE("transfer_unit conserves the invariant") {
    auto [e, step] = transfer_unit(standard_pair(5, 3, 12, 1), 0, 1, +1);
    CHECK(std::get<StandardLink>(e.terms[0].term) == StandardLink{5, 4});
    CHECK(std::get<StandardLink>(e.terms[1].term) == StandardLink{7, 1});
    CHECK(hopf_invariant(e) == 54);

    auto [e2, s2] = transfer_unit(standard_pair(4, 2, 9, 1), 0, 1, +1);
    CHECK(hopf_invariant(e2) == 34);
    CHECK(std::get<StandardLink>(e2.terms[0].term) == StandardLink{4, 3});
    CHECK(std::get<StandardLink>(e2.terms[1].term) == StandardLink{5, 1});

    // a|b + 0|1 -> a|(b+1) + (-a)|1
    auto [e3, s3] = transfer_unit(standard_pair(4, 2, 0, 1), 0, 1, +1);
    CHECK(std::get<StandardLink>(e3.terms[1].term) == StandardLink{-4, 1});
    CHECK(hopf_invariant(e3) == 16);
}

TEST_CASE("balance: spec examples") {
    CostModel model;
    auto [l1, t1] = balance(balance_input(16, 1, 0), model);
    CHECK(l1 == BalancedLink{4, 4, 0, 0});
    CHECK(hopf_invariant(l1) == 32);
    CHECK(verify_trace(t1.initial, t1, t1.final_state, model).ok);

    // already balanced: unchanged, zero cost
    auto [l2, t2] = balance(BalancedLink{4, 4, 0, 0}, model);
    CHECK(l2 == BalancedLink{4, 4, 0, 0});
    CHECK(t2.total_cost == Rat(0));
    CHECK(t2.empty());

    auto [l3, t3] = balance(balance_input(9, 2, 3), model);
    CHECK(is_balanced(l3));
    CHECK(balanced_predicate(l3.a, l3.b, l3.c));
    CHECK(2 * (l3.a * l3.b + l3.c) == 42);
    CHECK(verify_trace(t3.initial, t3, t3.final_state, model).ok);
}

TEST_CASE("balance: preconditions") {
    CostModel model;
    CHECK_THROWS_AS(balance(balance_input(2, 5, 0), model), PreconditionError); // a < b
    CHECK_THROWS_AS(balance(balance_input(2, 1, 17), model), PreconditionError); // c > 8a
}

TEST_CASE("balance: cost ceiling and termination over a dense sweep") {
    CostModel model;
    std::mt19937_64 rng(42);
    auto check_one = [&](Int a, Int b, Int c, Int eps) {
        auto [link, trace] = balance(balance_input(a, b, c, eps), model);
        CHECK(is_balanced(link));
        CHECK(hopf_invariant(link) == 2 * (a * b + c) + eps);
        Rat ceiling = model.kappa * model.C_bal * sqrt_upper(Rat(a + 1));
        if (trace.total_cost > ceiling) {
            CAPTURE(a);
            CAPTURE(b);
            CAPTURE(c);
            CHECK(trace.total_cost <= ceiling);
        }
        // termination: <= ceil(log2 a) + 8 rounds
        Int rounds = 0;
        for (const auto& s : trace.steps)
            if (s.move_name == "balance_round") ++rounds;
        Int cap = 8;
        for (Int v = a; v > 1; v /= 2) ++cap;
        CHECK(rounds <= cap);
    };
    // adversarial corners
    for (Int a = 1; a <= 120; ++a)
        for (Int b : {Int(0), Int(1), a / 2, a}) {
            if (b > a) continue;
            for (Int c : {Int(0), Int(1), a, 8 * a}) check_one(a, b, c, static_cast<Int>(rng() % 3) - 1);
        }
    // random large instances
    for (int i = 0; i < 400; ++i) {
        Int a = 1 + static_cast<Int>(rng() % 10000);
        Int b = static_cast<Int>(rng() % static_cast<std::uint64_t>(a + 1));
        Int c = static_cast<Int>(rng() % static_cast<std::uint64_t>(8 * a + 1));
        check_one(a, b, c, 0);
    }
}

TEST_CASE("represent_hopf") {
    LinkExpression e = represent_hopf(20);
    REQUIRE(e.terms.size() == 2);
    CHECK(std::get<StandardLink>(e.terms[0].term) == StandardLink{3, 3});
    CHECK(std::get<StandardLink>(e.terms[1].term) == StandardLink{1, 1});
    CHECK(hopf_invariant(e) == 20);

    CHECK(represent_hopf(0).terms.empty());

    LinkExpression o = represent_hopf(7);
    REQUIRE(o.terms.size() == 3);
    CHECK(std::get<StandardLink>(o.terms[0].term) == StandardLink{1, 3});
    CHECK(std::get<StandardLink>(o.terms[1].term) == StandardLink{0, 1});
    CHECK(std::get<UnitLoop>(o.terms[2].term) == UnitLoop{1});
    CHECK(hopf_invariant(o) == 7);

    for (Int h = -300; h <= 300; ++h) {
        LinkExpression r = represent_hopf(h);
        CHECK(hopf_invariant(r) == h);
        Int bound = isqrt_ceil(std::abs(h)) + 1;
        for (const auto& st : r.terms)
            if (const auto* l = std::get_if<StandardLink>(&st.term)) {
                CHECK(std::abs(l->a) <= bound);
                CHECK(std::abs(l->b) <= bound);
            }
    }
}

TEST_CASE("canonical_balanced is balanced at every invariant") {
    for (Int h = -2000; h <= 2000; ++h) {
        auto [g, l] = canonical_balanced(h);
        CHECK(is_balanced(l));
        CHECK(g * hopf_invariant(l) == h);
    }
}

TEST_CASE("absorb_units") {
    LinkExpression e;
    e.add(+1, UnitLoop{1});
    e.add(+1, UnitLoop{1});
    auto [r, t] = absorb_units(e);
    REQUIRE(r.terms.size() == 1);
    CHECK(std::get<StandardLink>(r.terms[0].term) == StandardLink{1, 1});
    CHECK(hopf_invariant(r) == 2);

    LinkExpression e2;
    e2.add(+1, UnitLoop{1});
    e2.add(-1, UnitLoop{1});
    auto [r2, t2] = absorb_units(e2);
    CHECK(r2.terms.empty());

    LinkExpression e3;
    e3.add(+1, UnitLoop{1});
    e3.add(+1, UnitLoop{1});
    e3.add(+1, UnitLoop{1});
    auto [r3, t3] = absorb_units(e3);
    CHECK(hopf_invariant(r3) == 3);
    REQUIRE(r3.terms.size() == 2);
    CostModel model;
    CHECK(verify_trace(e3, t3, r3, model).ok);
}

TEST_CASE("cancel: spec examples, progress and ceiling") {
    CostModel model;
    // x = y, all parameters below B: base table
    MoveTrace t1 = cancel(BalancedLink{3, 2, 1, 0}, BalancedLink{3, 2, 1, 0}, model);
    CHECK(t1.final_state.terms.empty());
    CHECK(verify_trace(t1.initial, t1, {}, model).ok);

    MoveTrace t2 = cancel(BalancedLink{3, 2, 1, 0}, BalancedLink{2, 3, 1, 0}, model);
    CHECK(verify_trace(t2.initial, t2, {}, model).ok);

    CHECK_THROWS_AS(cancel(BalancedLink{3, 2, 1, 0}, BalancedLink{2, 3, 2, 0}, model), HopfMismatch);
}

TEST_CASE("cancel: randomized progress, termination, ceiling") {
    CostModel model;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        Int h = static_cast<Int>(rng() % 240000);
        auto [g1, x] = canonical_balanced(h);
        // a second balanced representative of the same invariant
        Int eps = h % 2;
        Int m = (h - eps) / 2;
        BalancedLink y = x;
        if (m > 4 && x.b >= 1 && x.a + 1 <= 2 * (x.b - 1) && x.a + 1 >= x.b - 1) {
            // nudge shape while keeping the product decomposition valid
            y = BalancedLink{x.a + 1, x.b - 1, m - (x.a + 1) * (x.b - 1), eps};
            if (!is_balanced(y)) y = x;
        }
        MoveTrace t = cancel(x, y, model);
        CHECK(t.final_state.terms.empty());
        Rat ceiling = model.kappa * model.C_cancel *
                      sqrt_upper(Rat(std::max({x.a, x.b, x.c, y.a, y.b, y.c, Int(1)})));
        CHECK(t.total_cost <= ceiling);
        // progress: the subtracted-side product shrinks by 5/6 per round
        Int prev = -1;
        for (const auto& s : t.steps) {
            if (s.move_name != "cancel_round") continue;
            Int a2 = s.args[2], b2 = s.args[3];
            Int prod = std::abs(a2 * b2);
            if (prev >= 0 && std::abs(a2) > model.B) CHECK(6 * prod <= 5 * prev);
            prev = prod;
        }
        CHECK(verify_trace(t.initial, t, {}, model).ok);
    }
}

TEST_CASE("rebalance") {
    CostModel model;
    MoveTrace t0 = rebalance(BalancedLink{4, 4, 0, 0}, BalancedLink{4, 4, 0, 0}, model);
    CHECK(t0.empty());

    BalancedLink x{4, 4, 0, 0}, target{5, 3, 1, 0};
    REQUIRE(hopf_invariant(x) == hopf_invariant(target));
    MoveTrace t = rebalance(x, target, model);
    CHECK(verify_trace(balanced_to_expression(x), t, balanced_to_expression(target), model).ok);
    Rat ceiling = model.kappa * (model.C_cancel + Rat(2)) * Rat(size_of(x) + size_of(target));
    CHECK(t.total_cost <= ceiling);

    CHECK_THROWS_AS(rebalance(BalancedLink{4, 4, 0, 0}, BalancedLink{4, 4, 1, 0}, model), HopfMismatch);
}

TEST_CASE("add_balanced") {
    CostModel model;
    BalancedLink x{4, 4, 0, 0};
    // adding zero
    MoveTrace t0 = add_balanced(x, BalancedLink{}, x, false, model);
    CHECK(verify_trace(t0.initial, t0, balanced_to_expression(x), model).ok);

    auto [g, target] = canonical_balanced(64);
    REQUIRE(g == 1);
    MoveTrace t1 = add_balanced(x, x, target, false, model);
    CHECK(verify_trace(t1.initial, t1, balanced_to_expression(target), model).ok);

    BalancedLink y{5, 3, 1, 0};
    CHECK_THROWS_AS(add_balanced(x, y, target, true, model), HopfMismatch);

    // subtraction down to a nonzero target
    auto [g2, tgt2] = canonical_balanced(hopf_invariant(x) - hopf_invariant(BalancedLink{2, 1, 1, 0}));
    REQUIRE(g2 == 1);
    MoveTrace t2 = add_balanced(x, BalancedLink{2, 1, 1, 0}, tgt2, true, model);
    CHECK(verify_trace(t2.initial, t2, balanced_to_expression(tgt2), model).ok);
}

TEST_CASE("interlocked split: spec examples") {
    InterlockedLink big{4, {8, 8, 8, 8}, {8, 8, 8, 8}};
    auto [gb, partner] = canonical_balanced(hopf_invariant(LinkTerm{big}));
    REQUIRE(gb == 1);
    auto [pairs, trace] = split_interlocked_step(big, partner);
    REQUIRE(pairs.size() == 8);
    for (const auto& p : pairs) {
        CHECK(p.interlocked.n == 2);
        for (Int v : p.interlocked.a) CHECK(v == 4);
        for (Int v : p.interlocked.b) CHECK(v == 4);
        CHECK(hopf_invariant(LinkTerm{p.interlocked}) == p.partner_sign * hopf_invariant(p.partner));
    }
    CostModel model;
    CHECK(verify_trace(trace.initial, trace, trace.final_state, model).ok);

    InterlockedLink triv{1, {0}, {0}};
    auto [pairs2, trace2] = split_interlocked_step(triv, BalancedLink{});
    CHECK(pairs2.size() == 8);

    InterlockedLink mid{2, {3, 1}, {2, 2}};
    auto [gm, pm] = canonical_balanced(hopf_invariant(LinkTerm{mid}));
    auto [pairs3, trace3] = split_interlocked_step(mid, pm);
    REQUIRE(pairs3.size() == 8);
    // coordinate sums: ceil and floor halves reassemble the entries
    Int suma = 0;
    for (const auto& p : pairs3)
        for (Int v : p.interlocked.a) suma += v;
    Int expect = 0;
    for (Int v : mid.a) expect += 2 * v; // each entry split twice (b-splitting copies)
    CHECK(suma == expect);
    Int hsum = 0;
    for (const auto& p : pairs3) hsum += hopf_invariant(LinkTerm{p.interlocked}) -
                                         p.partner_sign * hopf_invariant(p.partner);
    CHECK(hsum == 0);
}

TEST_CASE("interlocked_to_balanced: cost ceiling") {
    CostModel model;
    InterlockedLink triv{1, {0}, {0}};
    MoveTrace t0 = interlocked_to_balanced(triv, BalancedLink{}, model);
    CHECK(t0.steps.size() <= 1);

    for (Int s : {4, 8, 16, 64, 256}) {
        std::vector<Int> entries(static_cast<std::size_t>(std::max<Int>(1, s / 2)), s);
        InterlockedLink link{static_cast<Int>(entries.size()), entries, entries};
        auto [g, target] = canonical_balanced(hopf_invariant(LinkTerm{link}));
        REQUIRE(g == 1);
        MoveTrace t = interlocked_to_balanced(link, target, model);
        Rat ceiling = Rat(2) * model.kappa * Rat(size_of(LinkTerm{link}) + 4);
        CHECK(t.total_cost <= ceiling);
        LinkExpression init;
        init.add(+1, link);
        CHECK(verify_trace(init, t, balanced_to_expression(target), model).ok);
    }

    InterlockedLink small{2, {1, 1}, {1, 1}};
    BalancedLink target{2, 1, 1, 0}; // H = 6
    REQUIRE(hopf_invariant(LinkTerm{small}) == hopf_invariant(target));
    MoveTrace t = interlocked_to_balanced(small, target, model);
    LinkExpression init;
    init.add(+1, small);
    CHECK(verify_trace(init, t, balanced_to_expression(target), model).ok);
}

TEST_CASE("twisted conversions") {
    CostModel model;
    auto [e0, t0] = twisted_to_interlocked(TwistedLink{0});
    CHECK(e0.terms.empty());
    auto [e1, t1] = twisted_to_interlocked(TwistedLink{1});
    CHECK(e1.terms.empty());
    auto [e4, t4] = twisted_to_interlocked(TwistedLink{4});
    CHECK(hopf_invariant(e4) == 6);
    CHECK(verify_trace(t4.initial, t4, e4, model).ok);

    // twisted_to_balanced at several degrees, via canonical targets
    for (Int d : {0, 1, 2, 3, 4, 5, 9, 16}) {
        Int h = d * (d - 1) / 2;
        auto [g, target] = canonical_balanced(h);
        REQUIRE(g == 1);
        MoveTrace t = twisted_to_balanced(TwistedLink{d}, target, model);
        LinkExpression init;
        init.add(+1, TwistedLink{d});
        CHECK(verify_trace(init, t, balanced_to_expression(target), model).ok);
        Rat ceiling = Rat(4) * model.kappa * Rat(size_of(LinkTerm{TwistedLink{d}}) + 4);
        CHECK(t.total_cost <= ceiling);
    }
    // Twisted{5} (H=10) -> {2,2,1,0} (H=10)
    MoveTrace t5 = twisted_to_balanced(TwistedLink{5}, BalancedLink{2, 2, 1, 0}, model);
    LinkExpression i5;
    i5.add(+1, TwistedLink{5});
    CHECK(verify_trace(i5, t5, balanced_to_expression(BalancedLink{2, 2, 1, 0}), model).ok);
}

TEST_CASE("hopf conservation fuzz across operations") {
    CostModel model;
    std::mt19937_64 rng(2024);
    int applications = 0;
    while (applications < 2000) {
        Int a = 1 + static_cast<Int>(rng() % 64);
        Int b = static_cast<Int>(rng() % static_cast<std::uint64_t>(a + 1));
        Int c = static_cast<Int>(rng() % static_cast<std::uint64_t>(4 * a + 1));
        auto [link, trace] = balance(balance_input(a, b, c), model);
        for (const auto& s : trace.steps) {
            CHECK(hopf_invariant(s.before) == hopf_invariant(s.after));
            ++applications;
        }
    }
}

TEST_CASE("verify_trace rejects tampering") {
    CostModel model;
    auto [link, trace] = balance(balance_input(16, 1, 3), model);
    REQUIRE(verify_trace(trace.initial, trace, trace.final_state, model).ok);

    // cost decrement -> check (c)
    MoveTrace bad = trace;
    bad.steps[0].cost = bad.steps[0].cost - Rat(1, 64);
    bad.total_cost = bad.total_cost - Rat(1, 64);
    VerifyReport r = verify_trace(bad.initial, bad, bad.final_state, model);
    CHECK(!r.ok);
    CHECK(r.check == "c");

    // hopf field mutation -> check (b)
    MoveTrace bad2 = trace;
    bad2.steps[0].hopf_after += 1;
    VerifyReport r2 = verify_trace(bad2.initial, bad2, bad2.final_state, model);
    CHECK(!r2.ok);
    CHECK(r2.check == "b");

    // output expression mutation -> replay mismatch (a)
    MoveTrace bad3 = trace;
    for (auto& st : bad3.steps[0].after.terms)
        if (auto* l = std::get_if<StandardLink>(&st.term)) {
            l->a += 2;
            break;
        }
    VerifyReport r3 = verify_trace(bad3.initial, bad3, bad3.final_state, model);
    CHECK(!r3.ok);

    // endpoint mismatch -> check (d)
    LinkExpression wrong_final = trace.final_state;
    wrong_final.add(+1, UnitLoop{1});
    VerifyReport r4 = verify_trace(trace.initial, trace, wrong_final, model);
    CHECK(!r4.ok);
    CHECK(r4.check == "d");

    // empty trace with equal endpoints is fine
    MoveTrace empty;
    CHECK(verify_trace(balanced_to_expression(link), empty, balanced_to_expression(link), model).ok);

    // structural damage (truncated args, renamed move) rejects cleanly
    MoveTrace bad5 = trace;
    bad5.steps[0].args.clear();
    VerifyReport r5 = verify_trace(bad5.initial, bad5, bad5.final_state, model);
    CHECK(!r5.ok);
    CHECK(r5.check == "a");

    MoveTrace bad6 = trace;
    bad6.steps[0].move_name = "balance_round_x";
    VerifyReport r6 = verify_trace(bad6.initial, bad6, bad6.final_state, model);
    CHECK(!r6.ok);
    CHECK(r6.check == "a");
}
