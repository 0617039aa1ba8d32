// JSON ingestion of algebra bundles and the command layer behind the CLI.
//
// Bundle schema: {"basis": [{"name","degree"}], "bracket": [{"left","right",
// "value":[{"basis","coeff"}]}], "differential": {name: value}, "splitting":
// {"L": [names], "A": [names]}, "derivations": {name: {"degree", "matrix":
// {name: value}}}, "elements": {name: value}, "max_arity",
// "derivation_selection": [names], "second_algebra": [names],
// "associative": bool, "multiplication": [...], "unit": name}.
// Rationals are "p/q" strings throughout.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "hdb/brackets.hpp"
#include "hdb/gla.hpp"
#include "hdb/report.hpp"

namespace hdb {

using Json = nlohmann::json;

struct AlgebraBundle {
  GLA gla;
  std::map<std::string, Vec> elements;
  std::map<std::string, LinearMap> derivations;
  std::vector<std::string> derivation_selection;
  std::optional<std::vector<int>> second_algebra;  // ambient indices of N
  std::optional<AssocAlgebra> assoc;
  int max_arity = 4;
};

// Throws std::invalid_argument with a field-qualified message on malformed
// input (duplicate names, unresolved references, bad rationals, ...).
AlgebraBundle parse_bundle(const Json& j);
AlgebraBundle parse_bundle_file(const std::string& path);

Json coderivation_to_json(const Coderivation& q);
Json morphism_to_json(const CoalgMorphism& f);
Json report_to_json(CheckReport rep);  // checks sorted by (identity, arity, word)

struct CmdResult {
  std::string command;
  CheckReport report;
  Json payload;  // command specific extra output (structures, brackets, ...)
};

CmdResult cmd_validate(const AlgebraBundle& b);
CmdResult cmd_brackets(const AlgebraBundle& b, const std::string& source, int arity,
                       bool via_transfer);
CmdResult cmd_check(const AlgebraBundle& b, const std::string& suite, int arity, uint64_t seed);
CmdResult cmd_transfer_check(const AlgebraBundle& b, int arity);
CmdResult cmd_cocone(const AlgebraBundle& b, bool with_second_algebra, int arity);
CmdResult cmd_fiber_model(const AlgebraBundle& b, int arity);

// Deterministic rendering. Timing never enters the json output, so repeated
// runs with equal inputs are byte identical; the text format appends a
// wall-clock line for humans.
std::string render_json(const CmdResult& r);
std::string render_text(const CmdResult& r, long long elapsed_ms);

}  // namespace hdb
