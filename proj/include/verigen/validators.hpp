#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "verigen/rational.hpp"
#include "verigen/traces.hpp"

namespace verigen {

// ---- artifact projection ----

struct ArtifactElement {
  std::string id;
  std::string kind;
  std::map<std::string, Rational> numeric_attrs;
  std::map<std::string, std::string> string_attrs;
  std::string json_pointer;  // location in the parsed document
};

struct ArtifactReference {
  std::string src;
  std::string role;
  std::string dst;
  bool dangling = false;
  std::string json_pointer;  // location of the reference value
};

// Graph projection of an artifact's canonical text. Keeps the parsed
// (order-preserving) document so repair edits can be re-serialized without
// disturbing key order.
struct ArtifactGraph {
  nlohmann::ordered_json doc;
  std::vector<ArtifactElement> elements;
  std::vector<ArtifactReference> references;

  const ArtifactElement* find(const std::string& id) const;
  ArtifactElement* find(const std::string& id);
  std::vector<const ArtifactReference*> refs_of(const std::string& src,
                                                const std::string& role) const;
  std::string serialize() const;  // canonical text (no whitespace)
};

// Declarative projection: any JSON object carrying `id_field` becomes an
// element; fields named in `reference_fields` become references; remaining
// scalars become attributes.
struct ProjectionRules {
  std::string id_field = "id";
  std::string kind_field = "kind";
  std::set<std::string> reference_fields;

  static ProjectionRules from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ArtifactGraph project_artifact(const std::string& artifact_text,
                               const ProjectionRules& rules);

// ---- semantic shapes ----

struct ShapeRequirement {
  enum Kind { RefExists, Cardinality, AttrPresent, AttrEnum } kind;
  std::string role;       // RefExists / Cardinality
  std::string dst_kind;   // RefExists
  long min = 0, max = 0;  // Cardinality
  std::string attr;       // AttrPresent / AttrEnum
  std::vector<std::string> allowed;  // AttrEnum
};

struct Shape {
  std::string id;
  std::string target_kind;
  std::vector<ShapeRequirement> requirements;
  std::string provenance;  // constraint record id or file ref

  static Shape from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

SemTrace validate_semantic(const ArtifactGraph& graph,
                           const std::vector<Shape>& shapes);

// ---- linear formulas ----

struct LinearConjunct {
  std::string id;
  std::map<std::string, Rational> terms;  // var -> coefficient
  enum Op { Le, Ge, Eq } op = Le;
  Rational rhs;
};

struct LinearFormula {
  std::string id;
  std::vector<std::string> variables;
  std::vector<LinearConjunct> conjuncts;
  std::string anchor_kind;  // optional: apply per element of this kind
  std::vector<std::string> defines;  // symbols introduced (lattice input)
  std::vector<std::string> uses;     // symbols referenced (lattice input)
  std::string provenance;

  static LinearFormula from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct FmOptions {
  std::size_t conjunct_cap = 10000;
};

// Decides the conjunction exactly (Fourier-Motzkin over rationals) after
// substituting `bindings` as equality atoms (ids "bind:<var>"). sat yields
// a witness model over every variable; unsat yields a 1-minimal core plus
// Farkas multipliers over directed atoms ("<id>+"/"<id>-" for equalities).
LogicCert validate_logic(const LinearFormula& formula,
                         const std::map<std::string, Rational>& bindings,
                         const FmOptions& options = {});

// Plain satisfiability of a conjunct set (same engine).
struct FmResult {
  bool sat = false;
  std::map<std::string, Rational> model;
  std::map<std::string, Rational> farkas;  // directed atom id -> multiplier
};
FmResult fm_decide(const std::vector<LinearConjunct>& conjuncts,
                   const FmOptions& options = {});

// Deletion-based 1-minimal unsat core. Throws "input-satisfiable" when the
// input set is satisfiable.
std::vector<std::string> minimize_unsat_core(
    const std::vector<LinearConjunct>& conjuncts, const FmOptions& options = {});

nlohmann::json conjunct_to_json(const LinearConjunct& c);
LinearConjunct conjunct_from_json(const nlohmann::json& j);
nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);

}  // namespace verigen
