#include "verigen/grammar.hpp"

#include "verigen/sha256.hpp"

namespace verigen {

GrammarKind grammar_kind_from_string(const std::string& s) {
  if (s == "regex") return GrammarKind::Regex;
  if (s == "json-schema-subset") return GrammarKind::JsonSchemaSubset;
  if (s == "gbnf") return GrammarKind::Gbnf;
  throw Error("unsupported-keyword", "unknown grammar kind '" + s + "'");
}

std::string grammar_kind_name(GrammarKind k) {
  switch (k) {
    case GrammarKind::Regex: return "regex";
    case GrammarKind::JsonSchemaSubset: return "json-schema-subset";
    case GrammarKind::Gbnf: return "gbnf";
  }
  return "?";
}

namespace {

// Line endings to \n, trailing spaces/tabs/CRs stripped per line, trailing
// blank lines dropped.
std::string canonicalize_source(const std::string& src) {
  std::string out;
  std::string line;
  auto flush_line = [&]() {
    std::size_t end = line.find_last_not_of(" \t\r");
    if (end == std::string::npos) {
      line.clear();
    } else {
      line.resize(end + 1);
    }
    out += line;
    out.push_back('\n');
    line.clear();
  };
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    if (c == '\r') {
      if (i + 1 < src.size() && src[i + 1] == '\n') ++i;
      flush_line();
    } else if (c == '\n') {
      flush_line();
    } else {
      line.push_back(c);
    }
  }
  if (!line.empty()) flush_line();
  while (out.size() >= 2 && out[out.size() - 1] == '\n' &&
         out[out.size() - 2] == '\n') {
    out.pop_back();
  }
  return out;
}

}  // namespace

std::string automaton_identity(const GrammarSpec& spec) {
  Sha256 h;
  h.update_framed(grammar_kind_name(spec.kind));
  h.update_framed(std::to_string(spec.kind == GrammarKind::Gbnf
                                     ? spec.unfold_depth
                                     : 0));
  h.update_framed(canonicalize_source(spec.source));
  auto digest = h.finish();
  std::string raw(reinterpret_cast<const char*>(digest.data()), digest.size());
  return to_hex(raw);
}

PrefixDfa compile_grammar(const GrammarSpec& spec, std::size_t state_cap) {
  switch (spec.kind) {
    case GrammarKind::Regex:
      return compile_regex(spec.source, state_cap);
    case GrammarKind::JsonSchemaSubset:
      return compile_json_schema(spec.source, state_cap);
    case GrammarKind::Gbnf:
      return compile_gbnf(spec.source, spec.unfold_depth, state_cap);
  }
  throw Error("internal", "unreachable grammar kind");
}

}  // namespace verigen
