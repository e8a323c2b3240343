#include "hopflink/io.hpp"

#include <fstream>

namespace hopflink::io {

json rat_to_json(const Rat& r) { return r.str(); }

Rat rat_from_json(const json& j) {
    if (j.is_number_integer()) return Rat(j.get<Int>());
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    throw ParseError("rational must be an integer or a \"p/q\" string");
}

json term_to_json(const SignedTerm& t) {
    json j;
    j["sign"] = t.sign;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StandardLink>) {
                j["type"] = "standard";
                j["a"] = v.a;
                j["b"] = v.b;
            } else if constexpr (std::is_same_v<T, UnitLoop>) {
                j["type"] = "unit";
                j["eps"] = v.eps;
            } else if constexpr (std::is_same_v<T, TwistedLink>) {
                j["type"] = "twisted";
                j["d"] = v.d;
            } else if constexpr (std::is_same_v<T, InterlockedLink>) {
                j["type"] = "interlocked";
                j["n"] = v.n;
                j["a"] = v.a;
                j["b"] = v.b;
            } else {
                j["type"] = "swaps";
                json pairs = json::array();
                for (auto [d1, d2] : v.swaps) pairs.push_back(json::array({d1, d2}));
                j["pairs"] = pairs;
            }
        },
        t.term);
    return j;
}

SignedTerm term_from_json(const json& j) {
    SignedTerm t;
    t.sign = j.at("sign").get<int>();
    if (t.sign != 1 && t.sign != -1) throw ParseError("term sign must be +-1");
    std::string type = j.at("type").get<std::string>();
    if (type == "standard") {
        t.term = StandardLink{j.at("a").get<Int>(), j.at("b").get<Int>()};
    } else if (type == "unit") {
        t.term = UnitLoop{j.at("eps").get<Int>()};
    } else if (type == "twisted") {
        t.term = TwistedLink{j.at("d").get<Int>()};
    } else if (type == "interlocked") {
        InterlockedLink l;
        l.n = j.at("n").get<Int>();
        l.a = j.at("a").get<std::vector<Int>>();
        l.b = j.at("b").get<std::vector<Int>>();
        t.term = std::move(l);
    } else if (type == "swaps") {
        SwapCables s;
        for (const auto& p : j.at("pairs")) s.swaps.emplace_back(p.at(0).get<Int>(), p.at(1).get<Int>());
        t.term = std::move(s);
    } else {
        throw ParseError("unknown term type: " + type);
    }
    return t;
}

json expression_to_json(const LinkExpression& e) {
    json terms = json::array();
    for (const auto& t : e.terms) terms.push_back(term_to_json(t));
    return json{{"terms", terms}};
}

LinkExpression expression_from_json(const json& j) {
    LinkExpression e;
    for (const auto& t : j.at("terms")) e.terms.push_back(term_from_json(t));
    return e;
}

json balanced_to_json(const BalancedLink& l) {
    return json{{"a", l.a}, {"b", l.b}, {"c", l.c}, {"eps", l.eps}};
}

BalancedLink balanced_from_json(const json& j) {
    return BalancedLink{j.at("a").get<Int>(), j.at("b").get<Int>(), j.at("c").get<Int>(),
                        j.at("eps").get<Int>()};
}

json trace_to_json(const MoveTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        json js;
        js["move"] = s.move_name;
        js["before"] = expression_to_json(s.before);
        js["after"] = expression_to_json(s.after);
        js["cost"] = rat_to_json(s.cost);
        js["hopf_before"] = s.hopf_before;
        js["hopf_after"] = s.hopf_after;
        js["args"] = s.args;
        if (!s.children.empty()) {
            json ch = json::array();
            for (const auto& c : s.children) ch.push_back(trace_to_json(c));
            js["children"] = ch;
        }
        steps.push_back(std::move(js));
    }
    json j;
    j["steps"] = steps;
    j["total_cost"] = rat_to_json(t.total_cost);
    j["initial"] = expression_to_json(t.initial);
    j["final"] = expression_to_json(t.final_state);
    return j;
}

MoveTrace trace_from_json(const json& j) {
    MoveTrace t;
    for (const auto& js : j.at("steps")) {
        MoveStep s;
        s.move_name = js.at("move").get<std::string>();
        s.before = expression_from_json(js.at("before"));
        s.after = expression_from_json(js.at("after"));
        s.cost = rat_from_json(js.at("cost"));
        s.hopf_before = js.at("hopf_before").get<Int>();
        s.hopf_after = js.at("hopf_after").get<Int>();
        s.args = js.at("args").get<std::vector<Int>>();
        if (js.contains("children"))
            for (const auto& c : js.at("children")) s.children.push_back(trace_from_json(c));
        t.steps.push_back(std::move(s));
        t.total_cost += t.steps.back().cost;
    }
    // total_cost is redundant in the file; reject tampering
    if (rat_from_json(j.at("total_cost")) != t.total_cost)
        throw ParseError("trace total_cost does not match the sum of step costs");
    t.initial = expression_from_json(j.at("initial"));
    t.final_state = expression_from_json(j.at("final"));
    return t;
}

json permutation_to_json(const BlockPermutation& p) {
    return json{{"N", p.N}, {"cuts", p.cuts}, {"shifts", p.shifts}};
}

BlockPermutation permutation_from_json(const json& j) {
    BlockPermutation p;
    p.N = j.at("N").get<Int>();
    p.cuts = j.at("cuts").get<std::vector<Int>>();
    p.shifts = j.at("shifts").get<std::vector<Int>>();
    validate_permutation(p);
    return p;
}

json map_to_json(const CubicalMap& m) {
    json faces = json::array();
    Int side = m.side();
    for (int a = 0; a < 3; ++a)
        for (Int i = 0; i <= side; ++i)
            for (Int jj = 0; jj < side; ++jj)
                for (Int k = 0; k < side; ++k) {
                    Int d = m.face(a, i, jj, k);
                    if (d != 0) faces.push_back(json::array({a, i, jj, k, d}));
                }
    json cells = json::array();
    for (Int z = 0; z < side; ++z)
        for (Int y = 0; y < side; ++y)
            for (Int x = 0; x < side; ++x) {
                const CellLink& cl = m.cell(x, y, z);
                if (cl.link == BalancedLink{} && cl.sign == +1) continue;
                json c = json::array(
                    {x, y, z,
                     json{{"sign", cl.sign}, {"a", cl.link.a}, {"b", cl.link.b}, {"c", cl.link.c}, {"eps", cl.link.eps}}});
                cells.push_back(std::move(c));
            }
    json j;
    j["N"] = m.N;
    j["level"] = m.level;
    j["c_deg"] = m.c_deg;
    j["faces"] = faces;
    j["cells"] = cells;
    j["hopf_total"] = m.hopf_total;
    return j;
}

CubicalMap map_from_json(const json& j) {
    CubicalMap m = CubicalMap::zero_map(j.at("N").get<Int>(), j.at("level").get<Int>());
    if (j.contains("c_deg")) m.c_deg = j.at("c_deg").get<Int>();
    for (const auto& f : j.at("faces")) {
        int a = f.at(0).get<int>();
        if (a < 0 || a > 2) throw ParseError("face axis out of range");
        m.face(a, f.at(1).get<Int>(), f.at(2).get<Int>(), f.at(3).get<Int>()) = f.at(4).get<Int>();
    }
    for (const auto& c : j.at("cells")) {
        const json& l = c.at(3);
        CellLink cl;
        cl.sign = l.at("sign").get<int>();
        cl.link = BalancedLink{l.at("a").get<Int>(), l.at("b").get<Int>(), l.at("c").get<Int>(),
                               l.at("eps").get<Int>()};
        m.cell(c.at(0).get<Int>(), c.at(1).get<Int>(), c.at(2).get<Int>()) = cl;
    }
    m.hopf_total = j.at("hopf_total").get<Int>();
    return m;
}

json template_to_json(const TemplateTable& t) {
    json cables = json::array();
    for (const auto& c : t.cables)
        cables.push_back(json{{"id", c.id}, {"from", c.face_from}, {"to", c.face_to}});
    json lambda = json::array();
    for (std::size_t i = 0; i < t.lambda.size(); ++i)
        for (std::size_t jj = i + 1; jj < t.lambda.size(); ++jj)
            if (t.lambda[i][jj] != 0)
                lambda.push_back(json::array({static_cast<Int>(i), static_cast<Int>(jj), t.lambda[i][jj]}));
    json j;
    j["version"] = 1;
    j["cables"] = cables;
    j["lambda"] = lambda;
    j["tau"] = t.tau;
    j["generation_hash"] = t.generation_hash;
    return j;
}

TemplateTable template_from_json(const json& j) {
    TemplateTable t;
    for (const auto& c : j.at("cables")) {
        TemplateCable tc;
        tc.id = c.at("id").get<int>();
        tc.face_from = c.at("from").get<int>();
        tc.face_to = c.at("to").get<int>();
        t.cables.push_back(tc);
    }
    std::size_t n = t.cables.size();
    t.lambda.assign(n, std::vector<Int>(n, 0));
    for (const auto& e : j.at("lambda")) {
        auto a = e.at(0).get<std::size_t>();
        auto b = e.at(1).get<std::size_t>();
        Int v = e.at(2).get<Int>();
        t.lambda[a][b] = t.lambda[b][a] = v;
    }
    t.tau = j.at("tau").get<std::vector<Int>>();
    t.generation_hash = j.at("generation_hash").get<std::uint64_t>();
    return t;
}

json cable_to_json(const AbstractCableSpec& c) {
    json stripes = json::array();
    for (const auto& s : c.stripes) {
        json path = json::array();
        for (const auto& p : s.path) path.push_back(json::array({rat_to_json(p[0]), rat_to_json(p[1])}));
        stripes.push_back(json{{"width", s.width}, {"path", path}});
    }
    return json{{"n", c.n},         {"K", c.K},       {"length", rat_to_json(c.length)},
                {"h", rat_to_json(c.h)}, {"V", rat_to_json(c.V)}, {"stripes", stripes}};
}

AbstractCableSpec cable_from_json(const json& j) {
    AbstractCableSpec c;
    c.n = j.at("n").get<Int>();
    c.K = j.at("K").get<Int>();
    c.length = rat_from_json(j.at("length"));
    c.h = rat_from_json(j.at("h"));
    c.V = rat_from_json(j.at("V"));
    for (const auto& s : j.at("stripes")) {
        StripeSpec sp;
        sp.width = s.at("width").get<Int>();
        for (const auto& p : s.at("path"))
            sp.path.push_back(Vec2R{rat_from_json(p.at(0)), rat_from_json(p.at(1))});
        c.stripes.push_back(std::move(sp));
    }
    return c;
}

json homotopy_to_json(const CableHomotopy& h) {
    json frames = json::array();
    for (const auto& f : h.frames) frames.push_back(cable_to_json(f));
    return json{{"frames", frames},
                {"max_path_speed", rat_to_json(h.max_path_speed)},
                {"max_time_speed", rat_to_json(h.max_time_speed)},
                {"speed_bound", rat_to_json(h.speed_bound)}};
}

std::string homotopy_to_csv(const CableHomotopy& h) {
    std::string out = "frame,stripe,sample,x,y\n";
    for (std::size_t f = 0; f < h.frames.size(); ++f)
        for (std::size_t s = 0; s < h.frames[f].stripes.size(); ++s) {
            const auto& path = h.frames[f].stripes[s].path;
            for (std::size_t k = 0; k < path.size(); ++k)
                out += std::to_string(f) + "," + std::to_string(s) + "," + std::to_string(k) + "," +
                       path[k][0].str() + "," + path[k][1].str() + "\n";
        }
    return out;
}

json plan_report_to_json(const PlanReport& r) {
    json costs = json::array();
    for (const auto& c : r.level_costs) costs.push_back(rat_to_json(c));
    return json{{"level_costs", costs},
                {"cancel_cost", rat_to_json(r.cancel_cost)},
                {"total_cost", rat_to_json(r.total_cost)},
                {"linear", r.linear_verdict},
                {"detail", r.verdict_detail}};
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void save_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << dump_canonical(j);
}

} // namespace hopflink::io
