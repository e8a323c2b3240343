#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hopflink/bounds.hpp"
#include "hopflink/cable_geometry.hpp"
#include "hopflink/coarsening.hpp"
#include "hopflink/io.hpp"
#include "hopflink/link_calculus.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace hopflink;
using io::json;

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kHopfMismatch = 3;
constexpr int kMalformedInput = 4;

struct RunConfig {
    CostModel model;
    Int K = 4;
    Int c_deg = 2;
    Rat h{1, 8};
    std::uint64_t seed = 1;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    auto j = io::load_file(path);
    if (!j.is_object()) throw io::ParseError("config must be a flat object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "kappa") cfg.model.kappa = io::rat_from_json(it.value());
        else if (k == "C_bal") cfg.model.C_bal = io::rat_from_json(it.value());
        else if (k == "C_cancel") cfg.model.C_cancel = io::rat_from_json(it.value());
        else if (k == "B") cfg.model.B = it.value().get<Int>();
        else if (k == "C") cfg.model.C_slack = it.value().get<Int>();
        else if (k == "K") cfg.K = it.value().get<Int>();
        else if (k == "c_deg") cfg.c_deg = it.value().get<Int>();
        else if (k == "h") cfg.h = io::rat_from_json(it.value());
        else if (k == "seed") cfg.seed = it.value().get<std::uint64_t>();
        else throw io::ParseError("unknown config key: " + k);
    }
}

void emit(bool as_json, const json& payload, const std::string& text) {
    if (as_json) std::cout << io::dump_canonical(payload);
    else std::cout << text << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified Hopf-link rewrite engine and multiscale coarsening planner"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    bool as_json = false;
    std::string config_path;
    app.add_flag("--json", as_json, "machine-readable stdout");
    app.add_option("--config", config_path, "flat key=value config file (json object)");

    if (const char* threads = std::getenv("HF_THREADS")) {
#ifdef _OPENMP
        omp_set_num_threads(std::max(1, std::atoi(threads)));
#endif
    }

    // balance a b c [eps]
    auto* cmd_balance = app.add_subcommand("balance", "balance a|b + c|1 (+ unit)");
    Int bal_a = 0, bal_b = 0, bal_c = 0, bal_eps = 0;
    std::string bal_trace_out;
    cmd_balance->add_option("a", bal_a)->required();
    cmd_balance->add_option("b", bal_b)->required();
    cmd_balance->add_option("c", bal_c)->required();
    cmd_balance->add_option("eps", bal_eps);
    cmd_balance->add_option("--trace", bal_trace_out, "write the move trace to this file");

    // cancel x.json y.json
    auto* cmd_cancel = app.add_subcommand("cancel", "null-homotope x - y for balanced links");
    std::string cancel_x, cancel_y, cancel_trace_out;
    cmd_cancel->add_option("x", cancel_x)->required();
    cmd_cancel->add_option("y", cancel_y)->required();
    cmd_cancel->add_option("--trace", cancel_trace_out);

    // perm-decompose sigma.json
    auto* cmd_perm = app.add_subcommand("perm-decompose", "decompose a block permutation into swaps");
    std::string perm_in;
    cmd_perm->add_option("sigma", perm_in)->required();

    // comb c1.json c2.json
    auto* cmd_comb = app.add_subcommand("comb", "homotope two cables with equal ends");
    std::string comb_c1, comb_c2, comb_out, comb_csv;
    cmd_comb->add_option("c1", comb_c1)->required();
    cmd_comb->add_option("c2", comb_c2)->required();
    cmd_comb->add_option("--out", comb_out, "write the homotopy frames (json)");
    cmd_comb->add_option("--csv", comb_csv, "write a csv frame dump");

    // coarsen map.json
    auto* cmd_coarsen = app.add_subcommand("coarsen", "one scale-doubling step");
    std::string coarsen_in, coarsen_out, coarsen_trace_out;
    cmd_coarsen->add_option("map", coarsen_in)->required();
    cmd_coarsen->add_option("--out", coarsen_out);
    cmd_coarsen->add_option("--trace", coarsen_trace_out);

    // plan f0.json f1.json
    auto* cmd_plan = app.add_subcommand("plan", "full multiscale homotopy plan");
    std::string plan_f0, plan_f1, plan_report_out;
    cmd_plan->add_option("f0", plan_f0)->required();
    cmd_plan->add_option("f1", plan_f1)->required();
    cmd_plan->add_option("--report", plan_report_out);

    // verify-trace init.json trace.json final.json
    auto* cmd_verify = app.add_subcommand("verify-trace", "replay and check a move trace");
    std::string verify_init, verify_trace_path, verify_final;
    cmd_verify->add_option("initial", verify_init)->required();
    cmd_verify->add_option("trace", verify_trace_path)->required();
    cmd_verify->add_option("final", verify_final)->required();

    // lower-bound L n C
    auto* cmd_lower = app.add_subcommand("lower-bound", "flux lower bound for the Whitehead family");
    Int lb_L = 0, lb_n = 0;
    std::string lb_C = "1";
    cmd_lower->add_option("L", lb_L)->required();
    cmd_lower->add_option("n", lb_n)->required();
    cmd_lower->add_option("C", lb_C);

    // gen-map N seed out.json
    auto* cmd_gen = app.add_subcommand("gen-map", "generate a random valid cubical map");
    Int gen_N = 2;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    cmd_gen->add_option("N", gen_N)->required();
    cmd_gen->add_option("seed", gen_seed)->required();
    cmd_gen->add_option("out", gen_out)->required();

    // template [--out file]
    auto* cmd_template = app.add_subcommand("template", "emit the generated template table");
    std::string template_out;
    cmd_template->add_option("--out", template_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        TemplateTable table = TemplateTable::generate();

        if (*cmd_balance) {
            LinkExpression input;
            input.add(+1, StandardLink{bal_a, bal_b});
            input.add(+1, StandardLink{bal_c, 1});
            if (bal_eps != 0) input.add(+1, UnitLoop{bal_eps});
            auto [link, trace] = balance(input, cfg.model);
            if (!bal_trace_out.empty()) io::save_file(bal_trace_out, io::trace_to_json(trace));
            json out{{"balanced", io::balanced_to_json(link)},
                     {"cost", io::rat_to_json(trace.total_cost)},
                     {"steps", trace.steps.size()}};
            emit(as_json, out,
                 "balanced {" + std::to_string(link.a) + "," + std::to_string(link.b) + "," +
                     std::to_string(link.c) + "," + std::to_string(link.eps) + "} cost " +
                     trace.total_cost.str());
            return kOk;
        }
        if (*cmd_cancel) {
            BalancedLink x = io::balanced_from_json(io::load_file(cancel_x));
            BalancedLink y = io::balanced_from_json(io::load_file(cancel_y));
            MoveTrace trace = cancel(x, y, cfg.model);
            if (!cancel_trace_out.empty()) io::save_file(cancel_trace_out, io::trace_to_json(trace));
            emit(as_json, json{{"cost", io::rat_to_json(trace.total_cost)}, {"steps", trace.steps.size()}},
                 "cancelled, cost " + trace.total_cost.str());
            return kOk;
        }
        if (*cmd_perm) {
            BlockPermutation sigma = io::permutation_from_json(io::load_file(perm_in));
            auto swaps = decompose(sigma);
            json arr = json::array();
            for (const auto& s : swaps)
                arr.push_back(json{{"d1", s.d1}, {"d2", s.d2}, {"offset", s.offset}});
            emit(as_json, json{{"swaps", arr}}, std::to_string(swaps.size()) + " swaps");
            return kOk;
        }
        if (*cmd_comb) {
            AbstractCableSpec c1 = io::cable_from_json(io::load_file(comb_c1));
            AbstractCableSpec c2 = io::cable_from_json(io::load_file(comb_c2));
            for (const AbstractCableSpec* c : {&c1, &c2}) {
                CableReport r = validate_cable(*c);
                if (!r.ok) {
                    std::cerr << "invalid cable: " << r.to_string() << "\n";
                    return kValidationFailure;
                }
            }
            CableHomotopy h = comb(c1, c2);
            Rat bound = h.speed_bound;
            for (const auto& f : h.frames) {
                CableReport r = validate_cable(f, bound);
                if (!r.ok) {
                    std::cerr << "frame audit failed: " << r.to_string() << "\n";
                    return kValidationFailure;
                }
            }
            if (!comb_out.empty()) io::save_file(comb_out, io::homotopy_to_json(h));
            if (!comb_csv.empty()) {
                std::ofstream out(comb_csv);
                out << io::homotopy_to_csv(h);
            }
            emit(as_json,
                 json{{"frames", h.frames.size()},
                      {"max_path_speed", io::rat_to_json(h.max_path_speed)},
                      {"max_time_speed", io::rat_to_json(h.max_time_speed)},
                      {"speed_bound", io::rat_to_json(h.speed_bound)}},
                 std::to_string(h.frames.size()) + " frames, speeds within " + h.speed_bound.str());
            return kOk;
        }
        if (*cmd_coarsen) {
            CubicalMap m = io::map_from_json(io::load_file(coarsen_in));
            m.c_deg = cfg.c_deg;
            MapReport r = validate_map(m, table);
            if (!r.ok) {
                std::cerr << "invalid map: " << r.what << "\n";
                return kValidationFailure;
            }
            auto [coarse, trace] = coarsen_step(m, table, cfg.model);
            if (!coarsen_out.empty()) io::save_file(coarsen_out, io::map_to_json(coarse));
            if (!coarsen_trace_out.empty()) io::save_file(coarsen_trace_out, io::trace_to_json(trace));
            emit(as_json,
                 json{{"level", coarse.level}, {"cost", io::rat_to_json(trace.total_cost)}},
                 "coarsened to level " + std::to_string(coarse.level) + ", cost " +
                     trace.total_cost.str());
            return kOk;
        }
        if (*cmd_plan) {
            CubicalMap f0 = io::map_from_json(io::load_file(plan_f0));
            CubicalMap f1 = io::map_from_json(io::load_file(plan_f1));
            f0.c_deg = cfg.c_deg;
            f1.c_deg = cfg.c_deg;
            PlanReport rep = plan_homotopy(f0, f1, table, cfg.model);
            if (!plan_report_out.empty()) io::save_file(plan_report_out, io::plan_report_to_json(rep));
            emit(as_json, io::plan_report_to_json(rep),
                 "total cost " + rep.total_cost.str() +
                     (rep.linear_verdict ? ", level growth linear" : ", verdict: " + rep.verdict_detail));
            return kOk;
        }
        if (*cmd_verify) {
            LinkExpression init = io::expression_from_json(io::load_file(verify_init));
            MoveTrace trace = io::trace_from_json(io::load_file(verify_trace_path));
            LinkExpression fin = io::expression_from_json(io::load_file(verify_final));
            VerifyReport rep = verify_trace(init, trace, fin, cfg.model);
            emit(as_json, json{{"ok", rep.ok}, {"report", rep.to_string()}}, rep.to_string());
            return rep.ok ? kOk : kValidationFailure;
        }
        if (*cmd_lower) {
            LowerBoundResult r = lower_bound_length(lb_L, lb_n, Rat::parse(lb_C));
            emit(as_json,
                 json{{"length", io::rat_to_json(r.length)},
                      {"total_degree", io::rat_to_json(r.total_degree)},
                      {"flux_capacity", io::rat_to_json(r.flux_capacity)}},
                 r.length.str());
            return kOk;
        }
        if (*cmd_gen) {
            CubicalMap m = random_valid_map(gen_N, gen_seed, table);
            m.c_deg = cfg.c_deg;
            m.hopf_total = map_hopf(m, table);
            io::save_file(gen_out, io::map_to_json(m));
            emit(as_json, json{{"hopf_total", m.hopf_total}},
                 "map written, hopf_total " + std::to_string(m.hopf_total));
            return kOk;
        }
        if (*cmd_template) {
            json j = io::template_to_json(table);
            if (!template_out.empty()) io::save_file(template_out, j);
            emit(as_json, j, "template hash " + std::to_string(table.generation_hash));
            return kOk;
        }
    } catch (const HopfMismatch& e) {
        std::cerr << "hopf mismatch: " << e.what() << "\n";
        return kHopfMismatch;
    } catch (const io::ParseError& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return kMalformedInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return kMalformedInput;
    } catch (const calculus_error& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return kValidationFailure;
    }
    return kOk;
}
