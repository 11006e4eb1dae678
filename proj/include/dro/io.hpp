#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "dro/chance.hpp"
#include "dro/globalized.hpp"
#include "dro/mdp.hpp"
#include "dro/problem.hpp"
#include "dro/risk.hpp"

namespace dro {

using Json = nlohmann::ordered_json;

/// Any instance the CLI can consume. The schema is detected from the keys:
/// "kernels" selects an MDP, "unsafe_distance"/"unsafe_set" a chance
/// instance, "inner_cost"+"theta" a two-layer instance, otherwise a plain
/// ball instance.
using ParsedInstance = std::variant<DroProblem, ChanceInstance, GlobalizedInstance, RobustMdp>;

/// Parses and validates a problem file. Infinite costs are spelled as the
/// string "inf". Throws DroError(ParseError) with field context for
/// malformed input and forwards validation errors unchanged.
ParsedInstance parse_problem_file(const std::string& path);

ParsedInstance parse_instance_json(const Json& j);

DroProblem problem_from_json(const Json& j);
ChanceInstance chance_from_json(const Json& j);
GlobalizedInstance globalized_from_json(const Json& j);
RobustMdp mdp_from_json(const Json& j);
ScalarSamples samples_from_json(const Json& j);

/// Serializations invert the parsers bit-exactly: parse, serialize, parse
/// again yields identical values (doubles round-trip via shortest decimal).
Json problem_to_json(const DroProblem& problem);
Json chance_to_json(const ChanceInstance& instance);
Json globalized_to_json(const GlobalizedInstance& instance);
Json mdp_to_json(const RobustMdp& mdp);

}  // namespace dro
