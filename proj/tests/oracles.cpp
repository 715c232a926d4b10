#include "oracles.hpp"

#include <functional>
#include <map>

namespace oracles {

using verigen::LinearConjunct;
using verigen::Rational;

// ---------------------------------------------------------------------------
// regex oracle: independent parser + position-set matcher
// ---------------------------------------------------------------------------

namespace {

struct RNode {
  enum Kind { Lit, Any, Cls, Cat, Alt, Rep } kind;
  unsigned char byte = 0;
  std::set<unsigned char> cls;
  std::vector<RNode> kids;
  int min = 0, max = -1;
};

struct RParser {
  const std::string& s;
  std::size_t i = 0;

  explicit RParser(const std::string& src) : s(src) {}

  [[noreturn]] void die(const std::string& m) const {
    throw std::runtime_error("oracle regex: " + m);
  }
  bool eof() const { return i >= s.size(); }

  RNode parse() {
    RNode n = alt();
    if (!eof()) die("trailing input");
    return n;
  }

  RNode alt() {
    RNode n{RNode::Alt, 0, {}, {}, 0, -1};
    n.kids.push_back(cat());
    while (!eof() && s[i] == '|') {
      ++i;
      n.kids.push_back(cat());
    }
    if (n.kids.size() == 1) return n.kids[0];
    return n;
  }

  RNode cat() {
    RNode n{RNode::Cat, 0, {}, {}, 0, -1};
    while (!eof() && s[i] != '|' && s[i] != ')') n.kids.push_back(rep());
    return n;
  }

  RNode rep() {
    RNode base = atom();
    while (!eof()) {
      char c = s[i];
      int mn, mx;
      if (c == '*') {
        mn = 0;
        mx = -1;
        ++i;
      } else if (c == '+') {
        mn = 1;
        mx = -1;
        ++i;
      } else if (c == '?') {
        mn = 0;
        mx = 1;
        ++i;
      } else if (c == '{') {
        ++i;
        mn = number();
        mx = mn;
        if (!eof() && s[i] == ',') {
          ++i;
          mx = (!eof() && s[i] != '}') ? number() : -1;
        }
        if (eof() || s[i++] != '}') die("bad {}");
      } else {
        break;
      }
      RNode r{RNode::Rep, 0, {}, {base}, mn, mx};
      base = r;
    }
    return base;
  }

  int number() {
    int v = 0;
    if (eof() || !isdigit(static_cast<unsigned char>(s[i]))) die("digit expected");
    while (!eof() && isdigit(static_cast<unsigned char>(s[i]))) v = v * 10 + (s[i++] - '0');
    return v;
  }

  RNode atom() {
    if (eof()) die("dangling");
    char c = s[i++];
    if (c == '(') {
      RNode inner = alt();
      if (eof() || s[i++] != ')') die("unbalanced paren");
      return inner;
    }
    if (c == '.') return RNode{RNode::Any, 0, {}, {}, 0, -1};
    if (c == '[') return cls();
    if (c == '\\') return escape();
    RNode n{RNode::Lit, static_cast<unsigned char>(c), {}, {}, 0, -1};
    return n;
  }

  RNode escape() {
    if (eof()) die("dangling escape");
    char e = s[i++];
    auto lit = [](unsigned char b) { return RNode{RNode::Lit, b, {}, {}, 0, -1}; };
    switch (e) {
      case 'n': return lit('\n');
      case 't': return lit('\t');
      case 'r': return lit('\r');
      case 'd': case 'w': case 's': {
        RNode n{RNode::Cls, 0, {}, {}, 0, -1};
        if (e == 'd') {
          for (unsigned char b = '0'; b <= '9'; ++b) n.cls.insert(b);
        } else if (e == 'w') {
          for (unsigned char b = 'a'; b <= 'z'; ++b) n.cls.insert(b);
          for (unsigned char b = 'A'; b <= 'Z'; ++b) n.cls.insert(b);
          for (unsigned char b = '0'; b <= '9'; ++b) n.cls.insert(b);
          n.cls.insert('_');
        } else {
          for (char ws : {' ', '\t', '\n', '\r', '\f', '\v'}) {
            n.cls.insert(static_cast<unsigned char>(ws));
          }
        }
        return n;
      }
      case 'x': {
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          die("hex");
        };
        int v = hex(s[i]) * 16 + hex(s[i + 1]);
        i += 2;
        return lit(static_cast<unsigned char>(v));
      }
      default:
        return lit(static_cast<unsigned char>(e));
    }
  }

  RNode cls() {
    RNode n{RNode::Cls, 0, {}, {}, 0, -1};
    bool neg = false;
    if (!eof() && s[i] == '^') {
      neg = true;
      ++i;
    }
    bool first = true;
    while (true) {
      if (eof()) die("unterminated class");
      if (s[i] == ']' && !first) {
        ++i;
        break;
      }
      first = false;
      unsigned char lo = cls_char();
      if (!eof() && s[i] == '-' && i + 1 < s.size() && s[i + 1] != ']') {
        ++i;
        unsigned char hi = cls_char();
        for (int b = lo; b <= hi; ++b) n.cls.insert(static_cast<unsigned char>(b));
      } else {
        n.cls.insert(lo);
      }
    }
    if (neg) {
      std::set<unsigned char> inv;
      for (int b = 0; b < 256; ++b) {
        if (n.cls.count(static_cast<unsigned char>(b)) == 0) {
          inv.insert(static_cast<unsigned char>(b));
        }
      }
      n.cls = std::move(inv);
    }
    return n;
  }

  unsigned char cls_char() {
    char c = s[i++];
    if (c != '\\') return static_cast<unsigned char>(c);
    char e = s[i++];
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'x': {
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          return h - 'A' + 10;
        };
        int v = hex(s[i]) * 16 + hex(s[i + 1]);
        i += 2;
        return static_cast<unsigned char>(v);
      }
      default: return static_cast<unsigned char>(e);
    }
  }
};

std::set<std::size_t> rmatch(const RNode& n, const std::string& text,
                             std::size_t pos) {
  std::set<std::size_t> out;
  switch (n.kind) {
    case RNode::Lit:
      if (pos < text.size() && static_cast<unsigned char>(text[pos]) == n.byte) {
        out.insert(pos + 1);
      }
      break;
    case RNode::Any:
      if (pos < text.size() && text[pos] != '\n') out.insert(pos + 1);
      break;
    case RNode::Cls:
      if (pos < text.size() &&
          n.cls.count(static_cast<unsigned char>(text[pos])) != 0) {
        out.insert(pos + 1);
      }
      break;
    case RNode::Cat: {
      std::set<std::size_t> cur{pos};
      for (const RNode& kid : n.kids) {
        std::set<std::size_t> next;
        for (std::size_t p : cur) {
          auto ends = rmatch(kid, text, p);
          next.insert(ends.begin(), ends.end());
        }
        cur = std::move(next);
        if (cur.empty()) break;
      }
      out = std::move(cur);
      break;
    }
    case RNode::Alt:
      for (const RNode& kid : n.kids) {
        auto ends = rmatch(kid, text, pos);
        out.insert(ends.begin(), ends.end());
      }
      break;
    case RNode::Rep: {
      std::set<std::size_t> cur{pos};
      std::set<std::size_t> reached;
      int count = 0;
      if (n.min == 0) reached.insert(pos);
      while (!cur.empty() && (n.max < 0 || count < n.max)) {
        std::set<std::size_t> next;
        for (std::size_t p : cur) {
          auto ends = rmatch(n.kids[0], text, p);
          next.insert(ends.begin(), ends.end());
        }
        ++count;
        std::set<std::size_t> fresh;
        for (std::size_t p : next) {
          if (reached.count(p) == 0 || count <= n.min) fresh.insert(p);
        }
        if (count >= n.min) reached.insert(next.begin(), next.end());
        if (n.max < 0 && fresh.empty() && count > n.min) break;
        cur = std::move(next);
        if (count > int(text.size()) + n.min + 2) break;  // safety valve
      }
      out = std::move(reached);
      break;
    }
  }
  return out;
}

}  // namespace

bool regex_match(const std::string& pattern, const std::string& text) {
  RParser parser(pattern);
  RNode ast = parser.parse();
  auto ends = rmatch(ast, text, 0);
  return ends.count(text.size()) != 0;
}

// ---------------------------------------------------------------------------
// gbnf oracle: derivation walk with depth budget
// ---------------------------------------------------------------------------

namespace {

using verigen::gbnf_ast::Alternatives;
using verigen::gbnf_ast::Element;
using verigen::gbnf_ast::Grammar;

struct GbnfMatcher {
  const Grammar& g;
  const std::string& text;
  std::map<std::string, std::set<std::size_t>> memo;  // key -> end positions

  std::set<std::size_t> match_alts(const Alternatives& alts, std::size_t pos,
                                   int budget) {
    std::set<std::size_t> out;
    for (const auto& seq : alts) {
      auto ends = match_seq(seq, pos, budget);
      out.insert(ends.begin(), ends.end());
    }
    return out;
  }

  std::set<std::size_t> match_seq(const std::vector<Element>& seq, std::size_t pos,
                                  int budget) {
    std::set<std::size_t> cur{pos};
    for (const Element& e : seq) {
      std::set<std::size_t> next;
      for (std::size_t p : cur) {
        auto ends = match_repeated(e, p, budget);
        next.insert(ends.begin(), ends.end());
      }
      cur = std::move(next);
      if (cur.empty()) break;
    }
    return cur;
  }

  std::set<std::size_t> match_repeated(const Element& e, std::size_t pos,
                                       int budget) {
    std::set<std::size_t> reached;
    std::set<std::size_t> cur{pos};
    int count = 0;
    if (e.min_repeat == 0) reached.insert(pos);
    while (!cur.empty() && (e.max_repeat < 0 || count < e.max_repeat)) {
      std::set<std::size_t> next;
      for (std::size_t p : cur) {
        auto ends = match_base(e, p, budget);
        next.insert(ends.begin(), ends.end());
      }
      ++count;
      if (count >= e.min_repeat) reached.insert(next.begin(), next.end());
      // Position sets over a finite string reach a fixpoint quickly.
      if (count > int(text.size()) + e.min_repeat + 2) break;
      cur = std::move(next);
    }
    return reached;
  }

  std::set<std::size_t> match_base(const Element& e, std::size_t pos, int budget) {
    switch (e.kind) {
      case Element::Terminal: {
        if (text.compare(pos, e.text.size(), e.text) == 0) {
          return {pos + e.text.size()};
        }
        return {};
      }
      case Element::Group:
        return match_alts(e.group, pos, budget);
      case Element::NonTerminal:
        return match_nt(e.text, pos, budget - 1);
    }
    return {};
  }

  std::set<std::size_t> match_nt(const std::string& name, std::size_t pos,
                                 int budget) {
    if (budget <= 0) return {};
    std::string key = name + ":" + std::to_string(pos) + ":" + std::to_string(budget);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    memo.emplace(key, std::set<std::size_t>{});  // cut re-entrancy at this key
    const Alternatives* alts = g.find(name);
    if (alts == nullptr) throw std::runtime_error("oracle gbnf: undefined " + name);
    auto out = match_alts(*alts, pos, budget);
    memo[key] = out;
    return out;
  }
};

}  // namespace

bool gbnf_match(const Grammar& grammar, const std::string& text, int depth) {
  // The root rule occupies nesting level 1, so it gets the full budget.
  GbnfMatcher m{grammar, text, {}};
  auto ends = m.match_nt(grammar.start, 0, depth);
  return ends.count(text.size()) != 0;
}

// ---------------------------------------------------------------------------
// schema oracle
// ---------------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

struct SchemaMatcher {
  const std::string& text;

  std::set<std::size_t> value_ends(const ordered_json& schema, std::size_t pos) {
    if (schema.contains("enum")) {
      std::set<std::size_t> out;
      for (const auto& v : schema.at("enum")) {
        std::string lit = v.dump();
        if (text.compare(pos, lit.size(), lit) == 0) out.insert(pos + lit.size());
      }
      return out;
    }
    std::string type = schema.at("type").get<std::string>();
    if (type == "boolean") {
      std::set<std::size_t> out;
      for (const char* lit : {"true", "false"}) {
        std::size_t n = std::string(lit).size();
        if (text.compare(pos, n, lit) == 0) out.insert(pos + n);
      }
      return out;
    }
    if (type == "integer") return integer_ends(schema, pos);
    if (type == "string") return string_ends(schema, pos);
    if (type == "object") return object_ends(schema, pos);
    if (type == "array") return array_ends(schema, pos);
    return {};
  }

  std::set<std::size_t> integer_ends(const ordered_json& schema, std::size_t pos) {
    std::set<std::size_t> out;
    bool has_min = schema.contains("minimum");
    bool has_max = schema.contains("maximum");
    long long lo = has_min ? schema.at("minimum").get<long long>() : 0;
    long long hi = has_max ? schema.at("maximum").get<long long>() : 0;
    std::size_t start = pos;
    bool neg = start < text.size() && text[start] == '-';
    std::size_t digits_at = start + (neg ? 1 : 0);
    for (std::size_t end = digits_at + 1; end <= text.size(); ++end) {
      std::string span = text.substr(digits_at, end - digits_at);
      bool all_digits = !span.empty() &&
                        span.find_first_not_of("0123456789") == std::string::npos;
      if (!all_digits) break;
      if (span.size() > 1 && span[0] == '0') break;  // no leading zeros
      if (span.size() > 17) break;
      long long mag = std::stoll(span);
      long long value = neg ? -mag : mag;
      if (neg && mag == 0) continue;  // no "-0"
      if (has_min && value < lo) continue;
      if (has_max && value > hi) continue;
      out.insert(end);
    }
    return out;
  }

  std::set<std::size_t> string_ends(const ordered_json& schema, std::size_t pos) {
    std::set<std::size_t> out;
    if (pos >= text.size() || text[pos] != '"') return out;
    for (std::size_t close = pos + 1; close <= text.size(); ++close) {
      if (close == text.size()) break;
      if (text[close] != '"') {
        unsigned char c = static_cast<unsigned char>(text[close]);
        if (c < 0x20 || c == '\\') break;  // canonical strings carry no escapes
        continue;
      }
      std::string content = text.substr(pos + 1, close - pos - 1);
      bool ok = true;
      if (schema.contains("pattern")) {
        ok = regex_match(schema.at("pattern").get<std::string>(), content);
      } else {
        for (unsigned char c : content) {
          if (c < 0x20 || c > 0x7e || c == '"' || c == '\\') ok = false;
        }
      }
      if (ok) out.insert(close + 1);
      // A '"' always terminates the string; longer spans are different values.
      break;
    }
    return out;
  }

  std::set<std::size_t> object_ends(const ordered_json& schema, std::size_t pos) {
    if (pos >= text.size() || text[pos] != '{') return {};
    std::vector<std::pair<std::string, ordered_json>> props;
    if (schema.contains("properties")) {
      for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
           ++it) {
        props.emplace_back(it.key(), it.value());
      }
    }
    std::set<std::string> required;
    for (const auto& r : schema.value("required", ordered_json::array())) {
      required.insert(r.get<std::string>());
    }
    // States: set of (prop index, emitted-any, position).
    std::set<std::pair<std::pair<std::size_t, bool>, std::size_t>> states{
        {{0, false}, pos + 1}};
    std::set<std::size_t> out;
    std::set<std::pair<std::pair<std::size_t, bool>, std::size_t>> seen;
    while (!states.empty()) {
      auto [key, p] = *states.begin();
      states.erase(states.begin());
      if (!seen.insert({key, p}).second) continue;
      auto [idx, emitted] = key;
      if (idx == props.size()) {
        if (p < text.size() && text[p] == '}') out.insert(p + 1);
        continue;
      }
      const auto& [name, pschema] = props[idx];
      bool is_req = required.count(name) != 0;
      if (!is_req) states.insert({{idx + 1, emitted}, p});
      std::size_t q = p;
      if (emitted) {
        if (q >= text.size() || text[q] != ',') continue;
        ++q;
      }
      std::string keylit = "\"" + name + "\":";
      if (text.compare(q, keylit.size(), keylit) != 0) continue;
      q += keylit.size();
      for (std::size_t end : value_ends(pschema, q)) {
        states.insert({{idx + 1, true}, end});
      }
    }
    return out;
  }

  std::set<std::size_t> array_ends(const ordered_json& schema, std::size_t pos) {
    if (pos >= text.size() || text[pos] != '[') return {};
    long min_items = schema.value("minItems", 0L);
    long max_items = schema.contains("maxItems") ? schema.at("maxItems").get<long>() : -1;
    const ordered_json& items = schema.at("items");
    std::set<std::size_t> out;
    // (count, position) frontier.
    std::set<std::pair<long, std::size_t>> frontier{{0, pos + 1}};
    std::set<std::pair<long, std::size_t>> seen;
    while (!frontier.empty()) {
      auto [count, p] = *frontier.begin();
      frontier.erase(frontier.begin());
      if (!seen.insert({count, p}).second) continue;
      if (count >= min_items && p < text.size() && text[p] == ']') out.insert(p + 1);
      if (max_items >= 0 && count >= max_items) continue;
      if (count > long(text.size())) continue;
      std::size_t q = p;
      if (count > 0) {
        if (q >= text.size() || text[q] != ',') continue;
        ++q;
      }
      for (std::size_t end : value_ends(items, q)) frontier.insert({count + 1, end});
    }
    return out;
  }
};

std::optional<std::vector<std::string>> enumerate_values(const ordered_json& schema,
                                                         std::size_t cap);

std::optional<std::vector<std::string>> enumerate_object(const ordered_json& schema,
                                                         std::size_t cap) {
  std::vector<std::pair<std::string, ordered_json>> props;
  if (schema.contains("properties")) {
    for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
         ++it) {
      props.emplace_back(it.key(), it.value());
    }
  }
  std::set<std::string> required;
  for (const auto& r : schema.value("required", ordered_json::array())) {
    required.insert(r.get<std::string>());
  }
  std::vector<std::string> bodies{""};  // member-list fragments
  for (const auto& [name, pschema] : props) {
    auto values = enumerate_values(pschema, cap);
    if (!values) return std::nullopt;
    std::vector<std::string> next;
    bool is_req = required.count(name) != 0;
    for (const std::string& body : bodies) {
      if (!is_req) next.push_back(body);
      for (const std::string& v : *values) {
        std::string member = "\"" + name + "\":" + v;
        next.push_back(body.empty() ? member : body + "," + member);
        if (next.size() > cap) return std::nullopt;
      }
    }
    bodies = std::move(next);
  }
  std::vector<std::string> out;
  for (const std::string& body : bodies) out.push_back("{" + body + "}");
  return out;
}

std::optional<std::vector<std::string>> enumerate_values(const ordered_json& schema,
                                                         std::size_t cap) {
  std::vector<std::string> out;
  if (schema.contains("enum")) {
    for (const auto& v : schema.at("enum")) out.push_back(v.dump());
    return out;
  }
  std::string type = schema.at("type").get<std::string>();
  if (type == "boolean") return std::vector<std::string>{"true", "false"};
  if (type == "integer") {
    if (!schema.contains("minimum") || !schema.contains("maximum")) return std::nullopt;
    long long lo = schema.at("minimum").get<long long>();
    long long hi = schema.at("maximum").get<long long>();
    if (hi - lo + 1 > (long long)cap) return std::nullopt;
    for (long long v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
    return out;
  }
  if (type == "string") return std::nullopt;  // infinite
  if (type == "object") return enumerate_object(schema, cap);
  if (type == "array") {
    long min_items = schema.value("minItems", 0L);
    if (!schema.contains("maxItems")) return std::nullopt;
    long max_items = schema.at("maxItems").get<long>();
    auto values = enumerate_values(schema.at("items"), cap);
    if (!values) return std::nullopt;
    std::vector<std::vector<std::string>> by_count{{""}};
    for (long k = 1; k <= max_items; ++k) {
      std::vector<std::string> cur;
      for (const std::string& prefix : by_count.back()) {
        for (const std::string& v : *values) {
          cur.push_back(prefix.empty() ? v : prefix + "," + v);
          if (cur.size() > cap) return std::nullopt;
        }
      }
      by_count.push_back(std::move(cur));
    }
    for (long k = min_items; k <= max_items; ++k) {
      for (const std::string& body : by_count[std::size_t(k)]) {
        out.push_back("[" + body + "]");
        if (out.size() > cap) return std::nullopt;
      }
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace

bool schema_match(const ordered_json& schema, const std::string& text) {
  SchemaMatcher m{text};
  auto ends = m.value_ends(schema, 0);
  return ends.count(text.size()) != 0;
}

std::optional<std::set<std::string>> schema_language(const ordered_json& schema,
                                                     std::size_t cap) {
  auto values = enumerate_values(schema, cap);
  if (!values) return std::nullopt;
  return std::set<std::string>(values->begin(), values->end());
}

// ---------------------------------------------------------------------------
// enumeration + logic certificates
// ---------------------------------------------------------------------------

void for_each_string(const std::string& alphabet, std::size_t max_len,
                     const std::function<void(const std::string&)>& fn) {
  std::string cur;
  std::function<void()> rec = [&]() {
    fn(cur);
    if (cur.size() == max_len) return;
    for (char c : alphabet) {
      cur.push_back(c);
      rec();
      cur.pop_back();
    }
  };
  rec();
}

namespace {

// Directed atoms as the library emits them: "<id>+" carries (terms, rhs),
// "<id>-" carries (-terms, -rhs).
bool atom_for(const std::vector<LinearConjunct>& conjuncts, const std::string& atom_id,
              std::map<std::string, Rational>& coeffs, Rational& rhs) {
  if (atom_id.size() < 2) return false;
  char dir = atom_id.back();
  std::string id = atom_id.substr(0, atom_id.size() - 1);
  for (const LinearConjunct& c : conjuncts) {
    if (c.id != id) continue;
    bool plus_ok = c.op == LinearConjunct::Le || c.op == LinearConjunct::Eq;
    bool minus_ok = c.op == LinearConjunct::Ge || c.op == LinearConjunct::Eq;
    if (dir == '+' && plus_ok) {
      coeffs = c.terms;
      rhs = c.rhs;
      return true;
    }
    if (dir == '-' && minus_ok) {
      coeffs.clear();
      for (const auto& [v, k] : c.terms) coeffs[v] = -k;
      rhs = -c.rhs;
      return true;
    }
  }
  return false;
}

}  // namespace

bool verify_farkas(const std::vector<LinearConjunct>& conjuncts,
                   const std::map<std::string, Rational>& farkas) {
  if (farkas.empty()) return false;
  std::map<std::string, Rational> sum_coeffs;
  Rational sum_rhs;
  for (const auto& [atom_id, mult] : farkas) {
    if (mult.is_negative()) return false;
    std::map<std::string, Rational> coeffs;
    Rational rhs;
    if (!atom_for(conjuncts, atom_id, coeffs, rhs)) return false;
    for (const auto& [var, k] : coeffs) {
      Rational next = sum_coeffs.count(var) ? sum_coeffs[var] + k * mult : k * mult;
      if (next.is_zero()) {
        sum_coeffs.erase(var);
      } else {
        sum_coeffs[var] = next;
      }
    }
    sum_rhs = sum_rhs + rhs * mult;
  }
  return sum_coeffs.empty() && sum_rhs.is_negative();
}

bool verify_model(const std::vector<LinearConjunct>& conjuncts,
                  const std::map<std::string, Rational>& model) {
  for (const LinearConjunct& c : conjuncts) {
    Rational lhs;
    for (const auto& [var, k] : c.terms) {
      auto it = model.find(var);
      Rational v = it == model.end() ? Rational(0) : it->second;
      lhs = lhs + k * v;
    }
    bool ok = false;
    switch (c.op) {
      case LinearConjunct::Le: ok = lhs <= c.rhs; break;
      case LinearConjunct::Ge: ok = lhs >= c.rhs; break;
      case LinearConjunct::Eq: ok = lhs == c.rhs; break;
    }
    if (!ok) return false;
  }
  return true;
}

bool grid_satisfiable(const std::vector<LinearConjunct>& conjuncts,
                      const std::vector<std::string>& vars, long lo, long hi) {
  // Half-step grid over [lo, hi]^n.
  std::vector<Rational> points;
  for (long v = 2 * lo; v <= 2 * hi; ++v) points.emplace_back(v, 2);
  std::map<std::string, Rational> assignment;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
    if (i == vars.size()) return verify_model(conjuncts, assignment);
    for (const Rational& p : points) {
      assignment[vars[i]] = p;
      if (rec(i + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

}  // namespace oracles
