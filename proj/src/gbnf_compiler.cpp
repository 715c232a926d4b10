#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "verigen/grammar.hpp"

namespace verigen {
namespace gbnf_ast {

const Alternatives* Grammar::find(const std::string& name) const {
  for (const auto& [rule_name, alts] : rules) {
    if (rule_name == name) return &alts;
  }
  return nullptr;
}

namespace {

// Rules are one per line: `name ::= alternatives`. A line starting with '|'
// continues the previous rule. '#' starts a comment.
class Parser {
public:
  explicit Parser(const std::string& text) : text_(text) {}

  Grammar parse_all() {
    Grammar g;
    std::istringstream in(text_);
    std::string line;
    std::string pending;
    std::string pending_name;
    auto flush = [&]() {
      if (pending_name.empty()) return;
      g.rules.emplace_back(pending_name, parse_alternatives(pending));
      pending_name.clear();
      pending.clear();
    };
    while (std::getline(in, line)) {
      ++line_no_;
      std::string stripped = strip_comment(line);
      if (is_blank(stripped)) continue;
      std::size_t first = stripped.find_first_not_of(" \t");
      if (stripped[first] == '|') {
        if (pending_name.empty()) fail("continuation '|' with no rule");
        pending += " " + stripped.substr(first);
        continue;
      }
      flush();
      std::size_t def = stripped.find("::=");
      if (def == std::string::npos) fail("expected '::=' in rule");
      pending_name = trim(stripped.substr(0, def));
      if (pending_name.empty() || !valid_name(pending_name)) {
        fail("bad rule name '" + pending_name + "'");
      }
      pending = stripped.substr(def + 3);
    }
    flush();
    if (g.rules.empty()) fail("grammar has no rules");
    std::set<std::string> names;
    for (const auto& [name, alts] : g.rules) {
      if (!names.insert(name).second) fail("duplicate rule '" + name + "'");
      (void)alts;
    }
    g.start = g.rules.front().first;
    return g;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("gbnf-parse", "line " + std::to_string(line_no_) + ": " + msg);
  }

  static bool valid_name(const std::string& s) {
    for (char c : s) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
        return false;
      }
    }
    return true;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  static bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r") == std::string::npos;
  }

  static std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
  }

  Alternatives parse_alternatives(const std::string& body) {
    src_ = body;
    pos_ = 0;
    Alternatives alts = parse_alt_list();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input in rule body");
    return alts;
  }

  Alternatives parse_alt_list() {
    Alternatives alts;
    alts.push_back(parse_sequence());
    while (true) {
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '|') {
        ++pos_;
        alts.push_back(parse_sequence());
      } else {
        break;
      }
    }
    return alts;
  }

  std::vector<Element> parse_sequence() {
    std::vector<Element> seq;
    while (true) {
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] == '|' || src_[pos_] == ')') break;
      seq.push_back(parse_element());
    }
    return seq;
  }

  Element parse_element() {
    Element e;
    char c = src_[pos_];
    if (c == '"') {
      e.kind = Element::Terminal;
      e.text = parse_quoted();
    } else if (c == '(') {
      ++pos_;
      e.kind = Element::Group;
      e.group = parse_alt_list();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("unbalanced '('");
      ++pos_;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
               c == '_') {
      e.kind = Element::NonTerminal;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '-' || src_[pos_] == '_')) {
        e.text.push_back(src_[pos_++]);
      }
    } else {
      fail(std::string("unexpected '") + c + "' in rule body");
    }
    if (pos_ < src_.size()) {
      char suf = src_[pos_];
      if (suf == '*') {
        e.min_repeat = 0;
        e.max_repeat = -1;
        ++pos_;
      } else if (suf == '+') {
        e.min_repeat = 1;
        e.max_repeat = -1;
        ++pos_;
      } else if (suf == '?') {
        e.min_repeat = 0;
        e.max_repeat = 1;
        ++pos_;
      }
    }
    return e;
  }

  std::string parse_quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated terminal string");
      char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("dangling escape in terminal");
        char e = src_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    if (out.empty()) fail("empty terminal string");
    return out;
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  const std::string& text_;
  std::string src_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace

Grammar parse(const std::string& text) { return Parser(text).parse_all(); }

}  // namespace gbnf_ast

namespace {

using gbnf_ast::Alternatives;
using gbnf_ast::Element;
using gbnf_ast::Grammar;

// Unfolds the grammar into an NFA. A nonterminal reference at remaining
// budget k expands the referenced rule with budget k-1; budget 0 yields an
// unproducible fragment. Every reference expands to a fresh fragment:
// sharing entry/exit across uses would merge their continuations and
// accept strings outside the language. Depth bounds termination; the state
// budget bounds size.
class Unfolder {
public:
  Unfolder(const Grammar& g, int depth, std::size_t state_budget)
      : grammar_(g), state_budget_(state_budget) {
    if (depth < 1) throw Error("gbnf-parse", "unfold depth must be >= 1");
    auto [entry, exit] = fragment(g.start, depth);
    nfa_.start = entry;
    nfa_.accept = exit;
  }

  Nfa take() { return std::move(nfa_); }

private:
  void check_budget() {
    if (nfa_.states.size() > state_budget_) {
      throw Error("unfold-budget-exceeded",
                  "unfolded NFA exceeds state budget of " +
                      std::to_string(state_budget_));
    }
  }

  // Entry/exit pair for nonterminal `name` with `budget` levels available
  // (the rule itself consumes one).
  std::pair<int, int> fragment(const std::string& name, int budget) {
    const Alternatives* alts = grammar_.find(name);
    if (alts == nullptr) {
      throw Error("undefined-nonterminal", "rule '" + name + "' is not defined");
    }
    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    check_budget();
    if (budget <= 0) {
      // Unproducible at this depth: fragment with no path entry -> exit.
      return {entry, exit};
    }
    for (const auto& seq : *alts) {
      auto [a, b] = build_sequence(seq, budget, name);
      nfa_.add_eps(entry, a);
      nfa_.add_eps(b, exit);
    }
    return {entry, exit};
  }

  std::pair<int, int> build_sequence(const std::vector<Element>& seq,
                                     int budget, const std::string& tag) {
    int entry = nfa_.add_state();
    check_budget();
    int cur = entry;
    for (const Element& e : seq) {
      auto [a, b] = build_repeated(e, budget, tag);
      nfa_.add_eps(cur, a);
      cur = b;
    }
    return {entry, cur};
  }

  std::pair<int, int> build_repeated(const Element& e, int budget,
                                     const std::string& tag) {
    if (e.min_repeat == 1 && e.max_repeat == 1) {
      return build_base(e, budget, tag);
    }
    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    check_budget();
    int cur = entry;
    for (int i = 0; i < e.min_repeat; ++i) {
      auto [a, b] = build_base(e, budget, tag);
      nfa_.add_eps(cur, a);
      cur = b;
    }
    if (e.max_repeat < 0) {
      auto [a, b] = build_base(e, budget, tag);
      nfa_.add_eps(cur, a);
      nfa_.add_eps(b, a);
      nfa_.add_eps(b, exit);
      nfa_.add_eps(cur, exit);
    } else {
      nfa_.add_eps(cur, exit);
      for (int i = e.min_repeat; i < e.max_repeat; ++i) {
        auto [a, b] = build_base(e, budget, tag);
        nfa_.add_eps(cur, a);
        nfa_.add_eps(b, exit);
        cur = b;
      }
    }
    return {entry, exit};
  }

  std::pair<int, int> build_base(const Element& e, int budget,
                                 const std::string& tag) {
    switch (e.kind) {
      case Element::Terminal: {
        // Only byte-arc targets carry the tag: coverage counts consumption
        // progress, not epsilon-anticipation of a component.
        int entry = nfa_.add_state();
        int cur = entry;
        for (unsigned char c : e.text) {
          int nxt = nfa_.add_state(tag);
          nfa_.add_arc(cur, c, nxt);
          cur = nxt;
        }
        check_budget();
        return {entry, cur};
      }
      case Element::NonTerminal:
        return fragment(e.text, budget - 1);
      case Element::Group: {
        int entry = nfa_.add_state();
        int exit = nfa_.add_state();
        check_budget();
        for (const auto& seq : e.group) {
          auto [a, b] = build_sequence(seq, budget, tag);
          nfa_.add_eps(entry, a);
          nfa_.add_eps(b, exit);
        }
        return {entry, exit};
      }
    }
    throw Error("internal", "unreachable gbnf element kind");
  }

  const Grammar& grammar_;
  std::size_t state_budget_;
  Nfa nfa_;
};

}  // namespace

PrefixDfa compile_gbnf(const std::string& grammar_text, int unfold_depth,
                       std::size_t state_cap) {
  Grammar g = gbnf_ast::parse(grammar_text);
  // The NFA may be larger than the final DFA; give it headroom but keep it
  // bounded by the same order of magnitude.
  Unfolder unfolder(g, unfold_depth, state_cap * 4);
  Nfa nfa = unfolder.take();
  RawDfa raw = determinize(nfa, state_cap, "unfold-budget-exceeded");
  try {
    PrefixDfa dfa = annotate(raw);
    dfa.bind_identity(automaton_identity(
        {GrammarKind::Gbnf, grammar_text, unfold_depth}));
    return dfa;
  } catch (const Error& e) {
    if (e.code() == "start-state-dead") {
      throw Error("empty-language",
                  "grammar produces no string within unfold depth " +
                      std::to_string(unfold_depth));
    }
    throw;
  }
}

}  // namespace verigen
