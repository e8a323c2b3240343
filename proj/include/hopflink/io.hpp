#pragma once

#include <string>

#include <json.hpp>

#include "hopflink/cable_geometry.hpp"
#include "hopflink/coarsening.hpp"
#include "hopflink/monodromy.hpp"
#include "hopflink/trace.hpp"

namespace hopflink::io {

using json = nlohmann::json;

struct ParseError : calculus_error {
    using calculus_error::calculus_error;
};

json rat_to_json(const Rat& r);
Rat rat_from_json(const json& j);

json term_to_json(const SignedTerm& t);
SignedTerm term_from_json(const json& j);

json expression_to_json(const LinkExpression& e);
LinkExpression expression_from_json(const json& j);

json balanced_to_json(const BalancedLink& l);
BalancedLink balanced_from_json(const json& j);

json trace_to_json(const MoveTrace& t);
MoveTrace trace_from_json(const json& j);

json permutation_to_json(const BlockPermutation& p);
BlockPermutation permutation_from_json(const json& j);

json map_to_json(const CubicalMap& m);
CubicalMap map_from_json(const json& j);

json template_to_json(const TemplateTable& t);
TemplateTable template_from_json(const json& j);

json cable_to_json(const AbstractCableSpec& c);
AbstractCableSpec cable_from_json(const json& j);

json homotopy_to_json(const CableHomotopy& h);
std::string homotopy_to_csv(const CableHomotopy& h);

json plan_report_to_json(const PlanReport& r);

/// Canonical serialization: sorted keys, newline-terminated.
std::string dump_canonical(const json& j);

json load_file(const std::string& path);
void save_file(const std::string& path, const json& j);

} // namespace hopflink::io
