#include <array>
#include <initializer_list>

#include <json.hpp>

#include "verigen/grammar.hpp"

namespace verigen {

namespace {

using ordered_json = nlohmann::ordered_json;

// Builds an NFA accepting exactly the canonical textual serializations of
// values valid under the schema subset. Canonical form: no insignificant
// whitespace, object keys in declared order, integers without leading
// zeros, strings without escape sequences.
class SchemaBuilder {
public:
  explicit SchemaBuilder(Nfa& nfa) : nfa_(nfa) {}

  std::pair<int, int> build(const ordered_json& schema, const std::string& tag) {
    if (!schema.is_object()) {
      throw Error("schema-invalid", "schema node must be an object");
    }
    if (schema.contains("enum")) {
      check_keys(schema, {"enum", "type"});
      return build_enum(schema.at("enum"), tag);
    }
    if (!schema.contains("type") || !schema.at("type").is_string()) {
      throw Error("schema-invalid", "schema node needs a string 'type'");
    }
    std::string type = schema.at("type").get<std::string>();
    if (type == "object") {
      check_keys(schema, {"type", "properties", "required"});
      return build_object(schema, tag);
    }
    if (type == "array") {
      check_keys(schema, {"type", "items", "minItems", "maxItems"});
      return build_array(schema, tag);
    }
    if (type == "string") {
      check_keys(schema, {"type", "pattern"});
      return build_string(schema, tag);
    }
    if (type == "integer") {
      check_keys(schema, {"type", "minimum", "maximum"});
      return build_integer(schema, tag);
    }
    if (type == "boolean") {
      check_keys(schema, {"type"});
      return literal_alternatives({"true", "false"}, tag);
    }
    throw Error("unsupported-keyword", "type '" + type + "' is not supported");
  }

private:
  static void check_keys(const ordered_json& node,
                         std::initializer_list<const char*> allowed) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) {
        if (it.key() == k) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        throw Error("unsupported-keyword",
                    "keyword '" + it.key() + "' is not supported");
      }
    }
  }

  // Only byte-arc targets carry the tag (coverage counts consumption).
  std::pair<int, int> frag_literal(const std::string& text,
                                   const std::string& tag) {
    int entry = nfa_.add_state();
    int cur = entry;
    for (unsigned char c : text) {
      int nxt = nfa_.add_state(tag);
      nfa_.add_arc(cur, c, nxt);
      cur = nxt;
    }
    return {entry, cur};
  }

  std::pair<int, int> literal_alternatives(
      const std::vector<std::string>& options, const std::string& tag) {
    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    for (const std::string& opt : options) {
      auto [a, b] = frag_literal(opt, tag);
      nfa_.add_eps(entry, a);
      nfa_.add_eps(b, exit);
    }
    return {entry, exit};
  }

  std::pair<int, int> build_enum(const ordered_json& values,
                                 const std::string& tag) {
    if (!values.is_array() || values.empty()) {
      throw Error("unsatisfiable-schema", "enum must be a non-empty array");
    }
    std::vector<std::string> rendered;
    for (const auto& v : values) {
      if (!(v.is_string() || v.is_number_integer() || v.is_boolean())) {
        throw Error("unsupported-keyword",
                    "enum values must be strings, integers or booleans");
      }
      rendered.push_back(v.dump());
    }
    return literal_alternatives(rendered, tag);
  }

  std::pair<int, int> build_object(const ordered_json& schema,
                                   const std::string& tag) {
    std::vector<std::pair<std::string, ordered_json>> props;
    if (schema.contains("properties")) {
      const auto& p = schema.at("properties");
      if (!p.is_object()) throw Error("schema-invalid", "properties must be an object");
      for (auto it = p.begin(); it != p.end(); ++it) {
        props.emplace_back(it.key(), it.value());
      }
    }
    std::vector<std::string> required;
    if (schema.contains("required")) {
      for (const auto& r : schema.at("required")) {
        if (!r.is_string()) throw Error("schema-invalid", "required entries must be strings");
        std::string name = r.get<std::string>();
        bool declared = false;
        for (const auto& [pname, pschema] : props) {
          if (pname == name) declared = true;
          (void)pschema;
        }
        if (!declared) {
          throw Error("schema-invalid",
                      "required property '" + name + "' is not declared");
        }
        required.push_back(name);
      }
    }
    auto is_required = [&](const std::string& name) {
      for (const auto& r : required) {
        if (r == name) return true;
      }
      return false;
    };

    int entry = nfa_.add_state();
    int open = nfa_.add_state(tag);
    nfa_.add_arc(entry, '{', open);

    // Two lanes per position: whether a member has been emitted yet (the
    // emitted lane prefixes members with a comma).
    std::size_t n = props.size();
    std::vector<int> lane_first(n + 1), lane_rest(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      lane_first[i] = nfa_.add_state();
      lane_rest[i] = nfa_.add_state();
    }
    nfa_.add_eps(open, lane_first[0]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [name, pschema] = props[i];
      std::string ptag = tag.empty() ? name : tag + "." + name;
      if (!is_required(name)) {
        nfa_.add_eps(lane_first[i], lane_first[i + 1]);
        nfa_.add_eps(lane_rest[i], lane_rest[i + 1]);
      }
      // "name": value
      auto emit_member = [&](int from) {
        auto [ka, kb] = frag_literal("\"" + name + "\":", ptag);
        nfa_.add_eps(from, ka);
        auto [va, vb] = build(pschema, ptag);
        nfa_.add_eps(kb, va);
        nfa_.add_eps(vb, lane_rest[i + 1]);
      };
      emit_member(lane_first[i]);
      int comma = nfa_.add_state(tag);  // ',' target
      nfa_.add_arc(lane_rest[i], ',', comma);
      emit_member(comma);
    }
    int exit = nfa_.add_state(tag);  // '}' target
    int close_from_first = lane_first[n];
    int close_from_rest = lane_rest[n];
    nfa_.add_arc(close_from_first, '}', exit);
    nfa_.add_arc(close_from_rest, '}', exit);
    return {entry, exit};
  }

  std::pair<int, int> build_array(const ordered_json& schema,
                                  const std::string& tag) {
    if (!schema.contains("items")) {
      throw Error("schema-invalid", "array schema needs 'items'");
    }
    long min_items = 0;
    long max_items = -1;
    if (schema.contains("minItems")) min_items = schema.at("minItems").get<long>();
    if (schema.contains("maxItems")) max_items = schema.at("maxItems").get<long>();
    if (min_items < 0 || min_items > 8 || max_items > 8) {
      throw Error("unsupported-keyword", "minItems/maxItems must be in [0, 8]");
    }
    if (max_items >= 0 && max_items < min_items) {
      throw Error("unsatisfiable-schema", "maxItems < minItems");
    }
    const ordered_json& items = schema.at("items");

    int entry = nfa_.add_state();
    int open = nfa_.add_state(tag);
    nfa_.add_arc(entry, '[', open);
    int exit = nfa_.add_state(tag);

    // cur = state after k items emitted (comma handling: items after the
    // first are preceded by ',').
    int cur = open;
    if (min_items == 0) nfa_.add_arc(open, ']', exit);
    long hard_max = max_items >= 0 ? max_items : 8;  // loop tail handles rest
    for (long k = 1; k <= hard_max; ++k) {
      int before = k == 1 ? nfa_.add_state() : nfa_.add_state(tag);
      if (k == 1) {
        nfa_.add_eps(cur, before);
      } else {
        nfa_.add_arc(cur, ',', before);
      }
      auto [ia, ib] = build(items, tag);
      nfa_.add_eps(before, ia);
      cur = ib;
      if (k >= min_items) nfa_.add_arc(cur, ']', exit);
    }
    if (max_items < 0) {
      // Unbounded tail: ("," item)* after the 8th.
      int loop = nfa_.add_state();
      nfa_.add_eps(cur, loop);
      int comma = nfa_.add_state(tag);
      nfa_.add_arc(loop, ',', comma);
      auto [ia, ib] = build(items, tag);
      nfa_.add_eps(comma, ia);
      nfa_.add_eps(ib, loop);
      nfa_.add_arc(loop, ']', exit);
    }
    return {entry, exit};
  }

  std::pair<int, int> build_string(const ordered_json& schema,
                                   const std::string& tag) {
    int entry = nfa_.add_state();
    int open = nfa_.add_state(tag);
    nfa_.add_arc(entry, '"', open);
    int close = nfa_.add_state();
    int exit = nfa_.add_state(tag);
    nfa_.add_arc(close, '"', exit);
    if (schema.contains("pattern")) {
      const auto& p = schema.at("pattern");
      if (!p.is_string()) throw Error("schema-invalid", "pattern must be a string");
      regex_ast::NodePtr ast = regex_ast::parse(p.get<std::string>());
      auto [a, b] = regex_ast::build_nfa(nfa_, ast, tag);
      nfa_.add_eps(open, a);
      nfa_.add_eps(b, close);
    } else {
      // Default content: printable ASCII minus '"' and '\' (canonical form
      // carries no escape sequences).
      int body = nfa_.add_state(tag);  // self-loop byte target
      nfa_.add_eps(open, body);
      for (int c = 0x20; c <= 0x7e; ++c) {
        if (c == '"' || c == '\\') continue;
        nfa_.add_arc(body, static_cast<unsigned char>(c), body);
      }
      nfa_.add_eps(body, close);
    }
    return {entry, exit};
  }

  // ---- integers as canonical decimal strings ----

  static std::string digits_of(long long v, std::size_t width) {
    std::string s = std::to_string(v);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
  }

  // Numbers of exactly len digits in [lo, hi] (digit strings, same length,
  // no leading-zero issue by construction).
  std::pair<int, int> frag_same_len(const std::string& lo, const std::string& hi,
                                    const std::string& tag) {
    std::size_t len = lo.size();
    int exit = nfa_.add_state(tag);  // final digit target
    // Grid of states indexed by (pos, tight_low, tight_high).
    std::vector<std::array<int, 4>> grid(len + 1, {-1, -1, -1, -1});
    auto state_at = [&](std::size_t pos, bool tl, bool th) -> int {
      std::size_t idx = (tl ? 1u : 0u) | (th ? 2u : 0u);
      if (grid[pos][idx] < 0) {
        // pos 0 is the fragment entry (no byte consumed yet).
        grid[pos][idx] =
            pos == len ? exit : (pos == 0 ? nfa_.add_state() : nfa_.add_state(tag));
      }
      return grid[pos][idx];
    };
    int entry = state_at(0, true, true);
    for (std::size_t pos = 0; pos < len; ++pos) {
      for (int tl = 0; tl < 2; ++tl) {
        for (int th = 0; th < 2; ++th) {
          if (grid[pos][(tl ? 1 : 0) | (th ? 2 : 0)] < 0) continue;
          int from = grid[pos][(tl ? 1 : 0) | (th ? 2 : 0)];
          char dlo = tl ? lo[pos] : '0';
          char dhi = th ? hi[pos] : '9';
          for (char d = dlo; d <= dhi; ++d) {
            int to = state_at(pos + 1, tl && d == lo[pos], th && d == hi[pos]);
            nfa_.add_arc(from, static_cast<unsigned char>(d), to);
          }
        }
      }
    }
    return {entry, exit};
  }

  // Nonnegative integers in [lo, hi], canonical decimals.
  std::pair<int, int> frag_uint_range(long long lo, long long hi,
                                      const std::string& tag) {
    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    std::string lo_s = std::to_string(lo);
    std::string hi_s = std::to_string(hi);
    for (std::size_t len = lo_s.size(); len <= hi_s.size(); ++len) {
      long long len_lo = len == lo_s.size()
                             ? lo
                             : (len == 1 ? 0 : pow10(len - 1));
      long long len_hi = len == hi_s.size() ? hi : pow10(len) - 1;
      if (len_lo > len_hi) continue;
      auto [a, b] = frag_same_len(digits_of(len_lo, len), digits_of(len_hi, len), tag);
      nfa_.add_eps(entry, a);
      nfa_.add_eps(b, exit);
    }
    return {entry, exit};
  }

  // Nonnegative integers >= lo, canonical decimals.
  std::pair<int, int> frag_uint_ge(long long lo, const std::string& tag) {
    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    std::string lo_s = std::to_string(lo);
    std::size_t len = lo_s.size();
    // Same length: [lo, 99..9].
    auto [a, b] = frag_same_len(lo_s, std::string(len, '9'), tag);
    nfa_.add_eps(entry, a);
    nfa_.add_eps(b, exit);
    // Longer: [1-9] [0-9]{len,} — at least len+1 digits total.
    int cur = nfa_.add_state(tag);
    for (char d = '1'; d <= '9'; ++d) {
      nfa_.add_arc(entry, static_cast<unsigned char>(d), cur);
    }
    for (std::size_t i = 0; i < len; ++i) {
      int nxt = nfa_.add_state(tag);
      for (char d = '0'; d <= '9'; ++d) {
        nfa_.add_arc(cur, static_cast<unsigned char>(d), nxt);
      }
      cur = nxt;
    }
    for (char d = '0'; d <= '9'; ++d) {
      nfa_.add_arc(cur, static_cast<unsigned char>(d), cur);
    }
    nfa_.add_eps(cur, exit);
    return {entry, exit};
  }

  static long long pow10(std::size_t e) {
    long long v = 1;
    while (e-- > 0) v *= 10;
    return v;
  }

  std::pair<int, int> build_integer(const ordered_json& schema,
                                    const std::string& tag) {
    bool has_min = schema.contains("minimum");
    bool has_max = schema.contains("maximum");
    long long lo = has_min ? schema.at("minimum").get<long long>() : 0;
    long long hi = has_max ? schema.at("maximum").get<long long>() : 0;
    if (has_min && has_max && lo > hi) {
      throw Error("unsatisfiable-schema", "minimum > maximum");
    }
    constexpr long long kMagCap = 1000000000000000LL;  // 10^15, digit-safe
    if ((has_min && (lo < -kMagCap || lo > kMagCap)) ||
        (has_max && (hi < -kMagCap || hi > kMagCap))) {
      throw Error("unsupported-keyword", "integer bounds exceed 10^15");
    }

    int entry = nfa_.add_state();
    int exit = nfa_.add_state();
    auto attach = [&](std::pair<int, int> frag) {
      nfa_.add_eps(entry, frag.first);
      nfa_.add_eps(frag.second, exit);
    };
    auto attach_negative = [&](std::pair<int, int> magnitude) {
      int minus = nfa_.add_state(tag);
      nfa_.add_arc(entry, '-', minus);
      nfa_.add_eps(minus, magnitude.first);
      nfa_.add_eps(magnitude.second, exit);
    };

    if (!has_min && !has_max) {
      attach(frag_uint_ge(0, tag));
      attach_negative(frag_uint_ge(1, tag));
    } else if (has_min && has_max) {
      if (lo >= 0) {
        attach(frag_uint_range(lo, hi, tag));
      } else if (hi < 0) {
        attach_negative(frag_uint_range(-hi, -lo, tag));
      } else {
        attach(frag_uint_range(0, hi, tag));
        attach_negative(frag_uint_range(1, -lo, tag));
      }
    } else if (has_min) {
      if (lo >= 0) {
        attach(frag_uint_ge(lo < 0 ? 0 : lo, tag));
      } else {
        attach(frag_uint_ge(0, tag));
        attach_negative(frag_uint_range(1, -lo, tag));
      }
    } else {  // has_max only
      if (hi >= 0) {
        attach(frag_uint_range(0, hi, tag));
        attach_negative(frag_uint_ge(1, tag));
      } else {
        attach_negative(frag_uint_ge(-hi, tag));
      }
    }
    return {entry, exit};
  }

  Nfa& nfa_;
};

}  // namespace

PrefixDfa compile_json_schema(const std::string& schema_text,
                              std::size_t state_cap) {
  ordered_json schema;
  try {
    schema = ordered_json::parse(schema_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema-invalid", std::string("schema does not parse: ") + e.what());
  }
  Nfa nfa;
  SchemaBuilder builder(nfa);
  auto [entry, exit] = builder.build(schema, "");
  nfa.start = entry;
  nfa.accept = exit;
  RawDfa raw = determinize(nfa, state_cap);
  try {
    PrefixDfa dfa = annotate(raw);
    dfa.bind_identity(
        automaton_identity({GrammarKind::JsonSchemaSubset, schema_text, 0}));
    return dfa;
  } catch (const Error& e) {
    if (e.code() == "start-state-dead") {
      throw Error("unsatisfiable-schema", "schema admits no value");
    }
    throw;
  }
}

}  // namespace verigen
