#pragma once

// Test-only brute-force oracles. These deliberately avoid the library's
// automaton path: the regex oracle has its own parser and matcher, the gbnf
// oracle walks derivations directly, the schema oracle re-implements the
// canonical-form semantics, and logic claims are checked by exact
// certificate arithmetic (models by substitution, unsat by Farkas).

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "verigen/grammar.hpp"
#include "verigen/validators.hpp"

namespace oracles {

// Anchored whole-match membership, independent parser + position-set matcher.
bool regex_match(const std::string& pattern, const std::string& text);

// Membership in L(G) restricted to derivation-tree nonterminal nesting <= d.
bool gbnf_match(const verigen::gbnf_ast::Grammar& grammar, const std::string& text,
                int depth);

// Canonical-form membership under the schema subset semantics.
bool schema_match(const nlohmann::ordered_json& schema, const std::string& text);

// Full canonical language when finite and no larger than `cap`.
std::optional<std::set<std::string>> schema_language(
    const nlohmann::ordered_json& schema, std::size_t cap = 200000);

// All strings over `alphabet` with length <= max_len, streamed to `fn`.
void for_each_string(const std::string& alphabet, std::size_t max_len,
                     const std::function<void(const std::string&)>& fn);

// Exact check of a Farkas certificate: multipliers nonnegative, coefficient
// sums cancel, right-hand sides sum negative. Proves the conjunct set unsat.
bool verify_farkas(const std::vector<verigen::LinearConjunct>& conjuncts,
                   const std::map<std::string, verigen::Rational>& farkas);

// Exact substitution check of a model against every conjunct.
bool verify_model(const std::vector<verigen::LinearConjunct>& conjuncts,
                  const std::map<std::string, verigen::Rational>& model);

// Half-step rational grid search over [lo, hi] per variable.
bool grid_satisfiable(const std::vector<verigen::LinearConjunct>& conjuncts,
                      const std::vector<std::string>& vars, long lo, long hi);

}  // namespace oracles
