#include <cctype>

#include "verigen/grammar.hpp"

namespace verigen {
namespace regex_ast {

namespace {

class Parser {
public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr n = parse_alt();
    if (pos_ != src_.size()) {
      fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    return n;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("unsupported-operator",
                "regex: " + msg + " at offset " + std::to_string(pos_));
  }

  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  char take() { return src_[pos_++]; }

  NodePtr parse_alt() {
    std::vector<NodePtr> branches;
    branches.push_back(parse_concat());
    while (!eof() && peek() == '|') {
      take();
      branches.push_back(parse_concat());
    }
    if (branches.size() == 1) return branches[0];
    auto n = std::make_shared<Node>();
    n->kind = Node::Alt;
    n->children = std::move(branches);
    return n;
  }

  NodePtr parse_concat() {
    std::vector<NodePtr> parts;
    while (!eof() && peek() != '|' && peek() != ')') {
      parts.push_back(parse_repeat());
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Concat;
    n->children = std::move(parts);
    return n;
  }

  NodePtr parse_repeat() {
    NodePtr atom = parse_atom();
    while (!eof()) {
      char c = peek();
      int min = 0, max = -1;
      if (c == '*') {
        take();
      } else if (c == '+') {
        take();
        min = 1;
      } else if (c == '?') {
        take();
        max = 1;
      } else if (c == '{') {
        take();
        min = parse_int();
        max = min;
        if (!eof() && peek() == ',') {
          take();
          max = (!eof() && peek() != '}') ? parse_int() : -1;
        }
        if (eof() || take() != '}') fail("unterminated {m,n}");
        if (max >= 0 && max < min) fail("bad repeat bounds {m,n} with n < m");
      } else {
        break;
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Repeat;
      n->child = atom;
      n->min = min;
      n->max = max;
      atom = n;
    }
    return atom;
  }

  int parse_int() {
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
      fail("expected digit");
    }
    long v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (take() - '0');
      if (v > 1000) fail("repeat bound too large");
    }
    return int(v);
  }

  NodePtr parse_atom() {
    if (eof()) fail("dangling operator");
    char c = take();
    switch (c) {
      case '(': {
        if (!eof() && peek() == '?') fail("lookaround / non-capturing groups");
        NodePtr inner = parse_alt();
        if (eof() || take() != ')') fail("unbalanced '('");
        return inner;
      }
      case '[':
        return parse_class();
      case '.': {
        auto n = std::make_shared<Node>();
        n->kind = Node::AnyByte;
        return n;
      }
      case '\\':
        return parse_escape();
      case '*':
      case '+':
      case '?':
      case '{':
        fail(std::string("quantifier '") + c + "' with no operand");
      default:
        return literal(static_cast<unsigned char>(c));
    }
  }

  static NodePtr literal(unsigned char b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Literal;
    n->byte = b;
    return n;
  }

  static NodePtr klass_node(std::vector<bool> set) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Class;
    n->klass = std::move(set);
    return n;
  }

  static void mark_range(std::vector<bool>& set, unsigned char lo,
                         unsigned char hi) {
    for (int b = lo; b <= hi; ++b) set[std::size_t(b)] = true;
  }

  static std::vector<bool> named_class(char c) {
    std::vector<bool> set(256, false);
    switch (c) {
      case 'd': mark_range(set, '0', '9'); break;
      case 'w':
        mark_range(set, 'a', 'z');
        mark_range(set, 'A', 'Z');
        mark_range(set, '0', '9');
        set[std::size_t('_')] = true;
        break;
      case 's':
        for (char ws : {' ', '\t', '\n', '\r', '\f', '\v'}) {
          set[std::size_t(static_cast<unsigned char>(ws))] = true;
        }
        break;
    }
    return set;
  }

  NodePtr parse_escape() {
    if (eof()) fail("dangling backslash");
    char c = take();
    switch (c) {
      case 'n': return literal('\n');
      case 't': return literal('\t');
      case 'r': return literal('\r');
      case 'd': case 'w': case 's': return klass_node(named_class(c));
      case 'x': {
        if (pos_ + 1 >= src_.size()) fail("truncated \\x escape");
        int v = hex_digit(take()) * 16;
        v += hex_digit(take());
        return literal(static_cast<unsigned char>(v));
      }
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) fail("backreference");
        if (std::isalpha(static_cast<unsigned char>(c))) {
          fail(std::string("escape \\") + c);
        }
        return literal(static_cast<unsigned char>(c));
    }
  }

  int hex_digit(char h) {
    if (h >= '0' && h <= '9') return h - '0';
    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
    fail("invalid hex digit");
  }

  NodePtr parse_class() {
    std::vector<bool> set(256, false);
    bool negate = false;
    if (!eof() && peek() == '^') {
      take();
      negate = true;
    }
    bool first = true;
    while (true) {
      if (eof()) fail("unterminated character class");
      char c = peek();
      if (c == ']' && !first) {
        take();
        break;
      }
      first = false;
      if (c == '&' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '&') {
        fail("class intersection '&&'");
      }
      unsigned char lo = class_char();
      if (!eof() && peek() == '-' && pos_ + 1 < src_.size() &&
          src_[pos_ + 1] != ']') {
        take();
        unsigned char hi = class_char();
        if (hi < lo) fail("inverted class range");
        mark_range(set, lo, hi);
      } else {
        set[std::size_t(lo)] = true;
      }
    }
    if (negate) {
      for (std::size_t i = 0; i < 256; ++i) set[i] = !set[i];
    }
    return klass_node(std::move(set));
  }

  unsigned char class_char() {
    char c = take();
    if (c != '\\') return static_cast<unsigned char>(c);
    if (eof()) fail("dangling backslash in class");
    char e = take();
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'x': {
        int v = hex_digit(take()) * 16;
        v += hex_digit(take());
        return static_cast<unsigned char>(v);
      }
      default:
        if (std::isalnum(static_cast<unsigned char>(e))) {
          fail(std::string("escape \\") + e + " in class");
        }
        return static_cast<unsigned char>(e);
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

}  // namespace

NodePtr parse(const std::string& pattern) { return Parser(pattern).parse_all(); }

std::pair<int, int> build_nfa(Nfa& nfa, const NodePtr& node,
                              const std::string& tag) {
  switch (node->kind) {
    case Node::Literal: {
      int a = nfa.add_state();
      int b = nfa.add_state(tag);  // byte-arc target carries the tag
      nfa.add_arc(a, node->byte, b);
      return {a, b};
    }
    case Node::AnyByte:
    case Node::Class: {
      int a = nfa.add_state();
      int b = nfa.add_state(tag);
      for (int byte = 0; byte < 256; ++byte) {
        bool in = node->kind == Node::AnyByte ? byte != '\n'
                                              : node->klass[std::size_t(byte)];
        if (in) nfa.add_arc(a, static_cast<unsigned char>(byte), b);
      }
      return {a, b};
    }
    case Node::Concat: {
      int entry = nfa.add_state();
      int cur = entry;
      for (const NodePtr& child : node->children) {
        auto [a, b] = build_nfa(nfa, child, tag);
        nfa.add_eps(cur, a);
        cur = b;
      }
      return {entry, cur};
    }
    case Node::Alt: {
      int entry = nfa.add_state();
      int exit = nfa.add_state();
      for (const NodePtr& child : node->children) {
        auto [a, b] = build_nfa(nfa, child, tag);
        nfa.add_eps(entry, a);
        nfa.add_eps(b, exit);
      }
      return {entry, exit};
    }
    case Node::Repeat: {
      int entry = nfa.add_state();
      int cur = entry;
      for (int i = 0; i < node->min; ++i) {
        auto [a, b] = build_nfa(nfa, node->child, tag);
        nfa.add_eps(cur, a);
        cur = b;
      }
      if (node->max < 0) {
        auto [a, b] = build_nfa(nfa, node->child, tag);
        int exit = nfa.add_state();
        nfa.add_eps(cur, a);
        nfa.add_eps(b, a);
        nfa.add_eps(b, exit);
        nfa.add_eps(cur, exit);
        return {entry, exit};
      }
      int exit = nfa.add_state(tag);
      nfa.add_eps(cur, exit);
      for (int i = node->min; i < node->max; ++i) {
        auto [a, b] = build_nfa(nfa, node->child, tag);
        nfa.add_eps(cur, a);
        nfa.add_eps(b, exit);
        cur = b;
      }
      return {entry, exit};
    }
  }
  throw Error("internal", "unreachable regex node kind");
}

}  // namespace regex_ast

PrefixDfa compile_regex(const std::string& pattern, std::size_t state_cap) {
  regex_ast::NodePtr ast = regex_ast::parse(pattern);
  Nfa nfa;
  auto [entry, exit] = regex_ast::build_nfa(nfa, ast);
  nfa.start = entry;
  nfa.accept = exit;
  RawDfa raw = determinize(nfa, state_cap);
  try {
    PrefixDfa dfa = annotate(raw);
    dfa.bind_identity(
        automaton_identity({GrammarKind::Regex, pattern, 0}));
    return dfa;
  } catch (const Error& e) {
    if (e.code() == "start-state-dead") {
      throw Error("empty-language", "regex matches no string");
    }
    throw;
  }
}

}  // namespace verigen
