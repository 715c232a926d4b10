#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "verigen/automaton.hpp"

namespace verigen {

enum class GrammarKind { Regex, JsonSchemaSubset, Gbnf };

GrammarKind grammar_kind_from_string(const std::string& s);
std::string grammar_kind_name(GrammarKind k);

// A structural constraint source prior to compilation. `unfold_depth` only
// matters for gbnf but participates in the identity digest for every kind.
struct GrammarSpec {
  GrammarKind kind = GrammarKind::Regex;
  std::string source;
  int unfold_depth = 8;
};

// SHA-256 over the canonicalized source (line endings normalized to \n,
// trailing whitespace stripped per line) prefixed by the kind tag and the
// unfolding depth. Stable across runs and platforms.
std::string automaton_identity(const GrammarSpec& spec);

// Anchored whole-match regex over bytes. Supported: literals, '.', classes
// [...] with ranges and ^ negation, escapes (\n \t \r \xHH \d \w \s and
// punctuation), alternation, grouping, * + ? and {m}/{m,}/{m,n}.
PrefixDfa compile_regex(const std::string& pattern,
                        std::size_t state_cap = kDefaultStateCap);

// JSON-Schema subset over canonical serializations (declared key order, no
// insignificant whitespace). Supported keywords: type (object, array,
// string, integer, boolean), enum, required, properties, items,
// minItems/maxItems (<= 8), pattern, minimum/maximum.
PrefixDfa compile_json_schema(const std::string& schema_text,
                              std::size_t state_cap = kDefaultStateCap);

// GBNF with bounded unfolding: the accepted language is L(G) restricted to
// strings whose derivation-tree nonterminal nesting depth is <= d.
PrefixDfa compile_gbnf(const std::string& grammar_text, int unfold_depth,
                       std::size_t state_cap = kDefaultStateCap);

// Dispatches on spec.kind and binds the identity digest on the result.
PrefixDfa compile_grammar(const GrammarSpec& spec,
                          std::size_t state_cap = kDefaultStateCap);

// ---- shared AST types (also consumed by the schema compiler and tests) ----

namespace regex_ast {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  enum Kind { Literal, AnyByte, Class, Concat, Alt, Repeat } kind;
  unsigned char byte = 0;               // Literal
  std::vector<bool> klass;              // Class: 256 entries
  std::vector<NodePtr> children;        // Concat / Alt
  NodePtr child;                        // Repeat
  int min = 0;                          // Repeat
  int max = -1;                         // Repeat; -1 = unbounded
};

NodePtr parse(const std::string& pattern);

// Appends an NFA fragment for `node`; returns {entry, exit}.
std::pair<int, int> build_nfa(Nfa& nfa, const NodePtr& node,
                              const std::string& tag = {});

}  // namespace regex_ast

namespace gbnf_ast {

struct Element;
using Alternatives = std::vector<std::vector<Element>>;

struct Element {
  enum Kind { Terminal, NonTerminal, Group } kind;
  std::string text;      // Terminal bytes or nonterminal name
  Alternatives group;    // Group
  int min_repeat = 1;    // suffix: * -> 0/-1, + -> 1/-1, ? -> 0/1
  int max_repeat = 1;    // -1 = unbounded
};

struct Grammar {
  std::vector<std::pair<std::string, Alternatives>> rules;  // in source order
  std::string start;  // first rule

  const Alternatives* find(const std::string& name) const;
};

Grammar parse(const std::string& text);

}  // namespace gbnf_ast

}  // namespace verigen
