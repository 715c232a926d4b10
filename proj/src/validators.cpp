#include "verigen/validators.hpp"

#include <algorithm>

namespace verigen {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// projection
// ---------------------------------------------------------------------------

const ArtifactElement* ArtifactGraph::find(const std::string& id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

ArtifactElement* ArtifactGraph::find(const std::string& id) {
  for (auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::vector<const ArtifactReference*> ArtifactGraph::refs_of(
    const std::string& src, const std::string& role) const {
  std::vector<const ArtifactReference*> out;
  for (const auto& r : references) {
    if (r.src == src && r.role == role) out.push_back(&r);
  }
  return out;
}

std::string ArtifactGraph::serialize() const {
  if (doc.is_null()) return "";
  return doc.dump();
}

ProjectionRules ProjectionRules::from_json(const json& j) {
  ProjectionRules r;
  r.id_field = j.value("id_field", std::string("id"));
  r.kind_field = j.value("kind_field", std::string("kind"));
  for (const auto& f : j.value("reference_fields", json::array())) {
    r.reference_fields.insert(f.get<std::string>());
  }
  return r;
}

json ProjectionRules::to_json() const {
  json j;
  j["id_field"] = id_field;
  j["kind_field"] = kind_field;
  j["reference_fields"] = reference_fields;
  return j;
}

namespace {

void walk_projection(const ordered_json& node, const std::string& pointer,
                     const ProjectionRules& rules, ArtifactGraph& out) {
  if (node.is_object()) {
    if (node.contains(rules.id_field) && node.at(rules.id_field).is_string()) {
      ArtifactElement el;
      el.id = node.at(rules.id_field).get<std::string>();
      el.kind = node.contains(rules.kind_field) &&
                        node.at(rules.kind_field).is_string()
                    ? node.at(rules.kind_field).get<std::string>()
                    : "object";
      el.json_pointer = pointer;
      for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string& key = it.key();
        if (key == rules.id_field || key == rules.kind_field) continue;
        if (rules.reference_fields.count(key) != 0 && it.value().is_string()) {
          ArtifactReference ref;
          ref.src = el.id;
          ref.role = key;
          ref.dst = it.value().get<std::string>();
          ref.json_pointer = pointer + "/" + key;
          out.references.push_back(std::move(ref));
          continue;
        }
        if (it.value().is_number_integer()) {
          el.numeric_attrs[key] = Rational(it.value().get<std::int64_t>());
        } else if (it.value().is_string()) {
          el.string_attrs[key] = it.value().get<std::string>();
        } else if (it.value().is_boolean()) {
          el.string_attrs[key] = it.value().get<bool>() ? "true" : "false";
        }
      }
      out.elements.push_back(std::move(el));
    }
    for (auto it = node.begin(); it != node.end(); ++it) {
      walk_projection(it.value(), pointer + "/" + it.key(), rules, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      walk_projection(node[i], pointer + "/" + std::to_string(i), rules, out);
    }
  }
}

}  // namespace

ArtifactGraph project_artifact(const std::string& artifact_text,
                               const ProjectionRules& rules) {
  ArtifactGraph g;
  if (artifact_text.empty()) return g;
  try {
    g.doc = ordered_json::parse(artifact_text);
  } catch (const json::exception& e) {
    throw Error("unparseable-artifact", e.what());
  }
  walk_projection(g.doc, "", rules, g);
  for (auto& ref : g.references) {
    ref.dangling = g.find(ref.dst) == nullptr;
  }
  return g;
}

// ---------------------------------------------------------------------------
// shapes
// ---------------------------------------------------------------------------

Shape Shape::from_json(const json& j) {
  Shape s;
  s.id = j.at("id").get<std::string>();
  s.target_kind = j.at("target_kind").get<std::string>();
  s.provenance = j.value("provenance", std::string());
  for (const auto& rj : j.at("requirements")) {
    ShapeRequirement r;
    std::string type = rj.at("type").get<std::string>();
    if (type == "ref_exists") {
      r.kind = ShapeRequirement::RefExists;
      r.role = rj.at("role").get<std::string>();
      r.dst_kind = rj.at("dst_kind").get<std::string>();
    } else if (type == "cardinality") {
      r.kind = ShapeRequirement::Cardinality;
      r.role = rj.at("role").get<std::string>();
      r.min = rj.at("min").get<long>();
      r.max = rj.at("max").get<long>();
      if (r.min > r.max) throw Error("shape-invalid", "cardinality min > max");
    } else if (type == "attr_present") {
      r.kind = ShapeRequirement::AttrPresent;
      r.attr = rj.at("name").get<std::string>();
    } else if (type == "attr_enum") {
      r.kind = ShapeRequirement::AttrEnum;
      r.attr = rj.at("name").get<std::string>();
      for (const auto& v : rj.at("allowed")) {
        r.allowed.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    } else {
      throw Error("shape-invalid", "unknown requirement type '" + type + "'");
    }
    s.requirements.push_back(std::move(r));
  }
  return s;
}

json Shape::to_json() const {
  json j;
  j["id"] = id;
  j["target_kind"] = target_kind;
  if (!provenance.empty()) j["provenance"] = provenance;
  json reqs = json::array();
  for (const auto& r : requirements) {
    json rj;
    switch (r.kind) {
      case ShapeRequirement::RefExists:
        rj["type"] = "ref_exists";
        rj["role"] = r.role;
        rj["dst_kind"] = r.dst_kind;
        break;
      case ShapeRequirement::Cardinality:
        rj["type"] = "cardinality";
        rj["role"] = r.role;
        rj["min"] = r.min;
        rj["max"] = r.max;
        break;
      case ShapeRequirement::AttrPresent:
        rj["type"] = "attr_present";
        rj["name"] = r.attr;
        break;
      case ShapeRequirement::AttrEnum:
        rj["type"] = "attr_enum";
        rj["name"] = r.attr;
        rj["allowed"] = r.allowed;
        break;
    }
    reqs.push_back(std::move(rj));
  }
  j["requirements"] = std::move(reqs);
  return j;
}

SemTrace validate_semantic(const ArtifactGraph& graph,
                           const std::vector<Shape>& shapes) {
  SemTrace trace;
  trace.time = TraceTimes::open();
  for (const Shape& s : shapes) {
    trace.shapes_checked.push_back(s.id);
    for (const ArtifactElement& el : graph.elements) {
      if (el.kind != s.target_kind) continue;
      for (const ShapeRequirement& r : s.requirements) {
        auto violate = [&](const std::string& path_leaf, const std::string& expected) {
          SemViolation v;
          v.shape_id = s.id;
          v.element_id = el.id;
          v.path = el.id + " / " + path_leaf;
          v.expected = expected;
          v.provenance = s.provenance;
          trace.violations.push_back(std::move(v));
        };
        switch (r.kind) {
          case ShapeRequirement::RefExists: {
            auto refs = graph.refs_of(el.id, r.role);
            if (refs.empty()) {
              violate(r.role, "must reference an existing " + r.dst_kind);
              break;
            }
            for (const ArtifactReference* ref : refs) {
              const ArtifactElement* dst = graph.find(ref->dst);
              if (dst == nullptr) {
                violate(r.role, "reference target '" + ref->dst +
                                    "' must exist and be a " + r.dst_kind);
              } else if (dst->kind != r.dst_kind) {
                violate(r.role, "reference target must be a " + r.dst_kind +
                                    ", found " + dst->kind);
              }
            }
            break;
          }
          case ShapeRequirement::Cardinality: {
            long n = long(graph.refs_of(el.id, r.role).size());
            if (n < r.min || n > r.max) {
              violate(r.role, "reference count in [" + std::to_string(r.min) +
                                  ", " + std::to_string(r.max) + "], found " +
                                  std::to_string(n));
            }
            break;
          }
          case ShapeRequirement::AttrPresent: {
            if (el.numeric_attrs.count(r.attr) == 0 &&
                el.string_attrs.count(r.attr) == 0) {
              violate(r.attr, "attribute must be present");
            }
            break;
          }
          case ShapeRequirement::AttrEnum: {
            std::string value;
            auto ns = el.numeric_attrs.find(r.attr);
            auto ss = el.string_attrs.find(r.attr);
            if (ns != el.numeric_attrs.end()) {
              value = ns->second.str();
            } else if (ss != el.string_attrs.end()) {
              value = ss->second;
            } else {
              violate(r.attr, "attribute must be present with an allowed value");
              break;
            }
            if (std::find(r.allowed.begin(), r.allowed.end(), value) ==
                r.allowed.end()) {
              std::string expected = "attribute value in {";
              for (std::size_t i = 0; i < r.allowed.size(); ++i) {
                if (i != 0) expected += ", ";
                expected += r.allowed[i];
              }
              expected += "}, found " + value;
              violate(r.attr, expected);
            }
            break;
          }
        }
      }
    }
  }
  trace.time.close();
  return trace;
}

// ---------------------------------------------------------------------------
// linear formulas / Fourier-Motzkin
// ---------------------------------------------------------------------------

json rational_to_json(const Rational& r) {
  return json::array({r.num(), r.den()});
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  return Rational(j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>());
}

json conjunct_to_json(const LinearConjunct& c) {
  json j;
  j["id"] = c.id;
  json terms;
  for (const auto& [var, coeff] : c.terms) terms[var] = rational_to_json(coeff);
  j["terms"] = std::move(terms);
  j["op"] = c.op == LinearConjunct::Le ? "<=" : (c.op == LinearConjunct::Ge ? ">=" : "==");
  j["rhs"] = rational_to_json(c.rhs);
  return j;
}

LinearConjunct conjunct_from_json(const json& j) {
  LinearConjunct c;
  c.id = j.at("id").get<std::string>();
  for (auto it = j.at("terms").begin(); it != j.at("terms").end(); ++it) {
    c.terms[it.key()] = rational_from_json(it.value());
  }
  std::string op = j.at("op").get<std::string>();
  if (op == "<=") {
    c.op = LinearConjunct::Le;
  } else if (op == ">=") {
    c.op = LinearConjunct::Ge;
  } else if (op == "==" || op == "=") {
    c.op = LinearConjunct::Eq;
  } else {
    throw Error("formula-invalid", "unknown op '" + op + "'");
  }
  c.rhs = rational_from_json(j.at("rhs"));
  return c;
}

LinearFormula LinearFormula::from_json(const json& j) {
  LinearFormula f;
  f.id = j.at("id").get<std::string>();
  for (const auto& v : j.value("variables", json::array())) {
    f.variables.push_back(v.get<std::string>());
  }
  for (const auto& cj : j.at("conjuncts")) {
    f.conjuncts.push_back(conjunct_from_json(cj));
  }
  f.anchor_kind = j.value("anchor_kind", std::string());
  for (const auto& d : j.value("defines", json::array())) {
    f.defines.push_back(d.get<std::string>());
  }
  for (const auto& u : j.value("uses", json::array())) {
    f.uses.push_back(u.get<std::string>());
  }
  f.provenance = j.value("provenance", std::string());
  // Every conjunct must reference declared variables only.
  for (const auto& c : f.conjuncts) {
    for (const auto& [var, coeff] : c.terms) {
      (void)coeff;
      if (std::find(f.variables.begin(), f.variables.end(), var) ==
          f.variables.end()) {
        throw Error("formula-invalid",
                    "conjunct '" + c.id + "' references undeclared variable '" +
                        var + "'");
      }
    }
  }
  return f;
}

json LinearFormula::to_json() const {
  json j;
  j["id"] = id;
  j["variables"] = variables;
  json cjs = json::array();
  for (const auto& c : conjuncts) cjs.push_back(conjunct_to_json(c));
  j["conjuncts"] = std::move(cjs);
  if (!anchor_kind.empty()) j["anchor_kind"] = anchor_kind;
  if (!defines.empty()) j["defines"] = defines;
  if (!uses.empty()) j["uses"] = uses;
  if (!provenance.empty()) j["provenance"] = provenance;
  return j;
}

namespace {

// One directed atom: sum(coeffs) <= rhs, tracked as a nonnegative
// combination of the original directed atoms (the Farkas bookkeeping).
struct Atom {
  std::map<std::string, Rational> coeffs;
  Rational rhs;
  std::map<std::string, Rational> lambda;
};

std::vector<Atom> to_atoms(const std::vector<LinearConjunct>& conjuncts) {
  std::vector<Atom> atoms;
  for (const auto& c : conjuncts) {
    auto push = [&](bool negate, const char* suffix) {
      Atom a;
      for (const auto& [var, coeff] : c.terms) {
        Rational v = negate ? -coeff : coeff;
        if (!v.is_zero()) a.coeffs[var] = v;
      }
      a.rhs = negate ? -c.rhs : c.rhs;
      a.lambda[c.id + suffix] = Rational(1);
      atoms.push_back(std::move(a));
    };
    switch (c.op) {
      case LinearConjunct::Le: push(false, "+"); break;
      case LinearConjunct::Ge: push(true, "-"); break;
      case LinearConjunct::Eq:
        push(false, "+");
        push(true, "-");
        break;
    }
  }
  return atoms;
}

void add_scaled(std::map<std::string, Rational>& into,
                const std::map<std::string, Rational>& from, const Rational& k) {
  for (const auto& [key, v] : from) {
    Rational next = into.count(key) ? into[key] + v * k : v * k;
    if (next.is_zero()) {
      into.erase(key);
    } else {
      into[key] = next;
    }
  }
}

}  // namespace

FmResult fm_decide(const std::vector<LinearConjunct>& conjuncts,
                   const FmOptions& options) {
  std::vector<Atom> atoms = to_atoms(conjuncts);

  // Variable elimination order: sorted names for determinism.
  std::set<std::string> var_set;
  for (const Atom& a : atoms) {
    for (const auto& [var, coeff] : a.coeffs) {
      (void)coeff;
      var_set.insert(var);
    }
  }
  std::vector<std::string> order(var_set.begin(), var_set.end());

  // Bounds recorded per eliminated variable for back-substitution.
  struct Stage {
    std::string var;
    std::vector<Atom> uppers;  // var <= expr
    std::vector<Atom> lowers;  // var >= expr (stored as original atoms)
  };
  std::vector<Stage> stages;

  FmResult result;
  auto check_ground = [&](const std::vector<Atom>& set) -> const Atom* {
    for (const Atom& a : set) {
      if (a.coeffs.empty() && a.rhs.is_negative()) return &a;
    }
    return nullptr;
  };

  std::vector<Atom> work = std::move(atoms);
  if (const Atom* bad = check_ground(work)) {
    result.sat = false;
    result.farkas = bad->lambda;
    return result;
  }

  for (const std::string& var : order) {
    Stage stage;
    stage.var = var;
    std::vector<Atom> rest;
    std::vector<Atom> uppers, lowers;
    for (Atom& a : work) {
      auto it = a.coeffs.find(var);
      if (it == a.coeffs.end()) {
        rest.push_back(std::move(a));
      } else if (it->second.is_positive()) {
        uppers.push_back(std::move(a));
      } else {
        lowers.push_back(std::move(a));
      }
    }
    for (const Atom& up : uppers) {
      for (const Atom& lo : lowers) {
        Rational cu = up.coeffs.at(var);        // > 0
        Rational cl = -(lo.coeffs.at(var));     // > 0
        // cl * up + cu * lo eliminates var.
        Atom combined;
        add_scaled(combined.coeffs, up.coeffs, cl);
        add_scaled(combined.coeffs, lo.coeffs, cu);
        combined.coeffs.erase(var);
        combined.rhs = up.rhs * cl + lo.rhs * cu;
        add_scaled(combined.lambda, up.lambda, cl);
        add_scaled(combined.lambda, lo.lambda, cu);
        if (combined.coeffs.empty()) {
          if (combined.rhs.is_negative()) {
            result.sat = false;
            result.farkas = combined.lambda;
            return result;
          }
          continue;  // trivially true ground fact
        }
        rest.push_back(std::move(combined));
        if (rest.size() > options.conjunct_cap) {
          throw Error("unbounded-growth",
                      "Fourier-Motzkin intermediate conjunct count exceeds " +
                          std::to_string(options.conjunct_cap));
        }
      }
    }
    stage.uppers = std::move(uppers);
    stage.lowers = std::move(lowers);
    stages.push_back(std::move(stage));
    work = std::move(rest);
    if (work.size() > options.conjunct_cap) {
      throw Error("unbounded-growth",
                  "Fourier-Motzkin intermediate conjunct count exceeds " +
                      std::to_string(options.conjunct_cap));
    }
  }

  // Satisfiable: back-substitute in reverse elimination order.
  result.sat = true;
  std::map<std::string, Rational>& model = result.model;
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    // var bounds: for uppers (c > 0): var <= (rhs - rest) / c
    //             for lowers (c < 0): var >= (rhs - rest) / c
    bool has_lo = false, has_hi = false;
    Rational lo, hi;
    auto eval_rest = [&](const Atom& a) {
      Rational sum;
      for (const auto& [v, coeff] : a.coeffs) {
        if (v == it->var) continue;
        sum = sum + coeff * model.at(v);
      }
      return sum;
    };
    for (const Atom& a : it->uppers) {
      Rational bound = (a.rhs - eval_rest(a)) / a.coeffs.at(it->var);
      if (!has_hi || bound < hi) {
        hi = bound;
        has_hi = true;
      }
    }
    for (const Atom& a : it->lowers) {
      Rational bound = (a.rhs - eval_rest(a)) / a.coeffs.at(it->var);
      if (!has_lo || bound > lo) {
        lo = bound;
        has_lo = true;
      }
    }
    Rational value;
    if (has_lo && has_hi) {
      Rational zero;
      value = (lo <= zero && zero <= hi) ? zero : lo;
    } else if (has_lo) {
      Rational zero;
      value = lo > zero ? lo : zero;
    } else if (has_hi) {
      Rational zero;
      value = hi < zero ? hi : zero;
    }
    model[it->var] = value;
  }
  return result;
}

std::vector<std::string> minimize_unsat_core(
    const std::vector<LinearConjunct>& conjuncts, const FmOptions& options) {
  if (fm_decide(conjuncts, options).sat) {
    throw Error("input-satisfiable", "conjunct set is satisfiable");
  }
  std::vector<LinearConjunct> core = conjuncts;
  std::size_t i = 0;
  while (i < core.size()) {
    std::vector<LinearConjunct> trial = core;
    trial.erase(trial.begin() + long(i));
    if (!fm_decide(trial, options).sat) {
      core = std::move(trial);  // still unsat without it: drop permanently
    } else {
      ++i;
    }
  }
  std::vector<std::string> ids;
  ids.reserve(core.size());
  for (const auto& c : core) ids.push_back(c.id);
  return ids;
}

LogicCert validate_logic(const LinearFormula& formula,
                         const std::map<std::string, Rational>& bindings,
                         const FmOptions& options) {
  LogicCert cert;
  cert.formula_id = formula.id;
  cert.provenance = formula.provenance;
  cert.time = TraceTimes::open();

  std::vector<LinearConjunct> system = formula.conjuncts;
  for (const auto& [var, value] : bindings) {
    if (std::find(formula.variables.begin(), formula.variables.end(), var) ==
        formula.variables.end()) {
      continue;  // binding for a variable this formula does not mention
    }
    LinearConjunct bind;
    bind.id = "bind:" + var;
    bind.terms[var] = Rational(1);
    bind.op = LinearConjunct::Eq;
    bind.rhs = value;
    system.push_back(std::move(bind));
  }

  FmResult r = fm_decide(system, options);
  if (r.sat) {
    cert.sat = true;
    for (const std::string& var : formula.variables) {
      auto it = r.model.find(var);
      cert.model[var] = it == r.model.end() ? Rational(0) : it->second;
    }
  } else {
    cert.sat = false;
    cert.core = minimize_unsat_core(system, options);
    // Re-run on the core so the certificate's multipliers refer to core
    // members only.
    std::vector<LinearConjunct> core_set;
    for (const auto& c : system) {
      if (std::find(cert.core.begin(), cert.core.end(), c.id) != cert.core.end()) {
        core_set.push_back(c);
      }
    }
    cert.farkas = fm_decide(core_set, options).farkas;
  }
  cert.time.close();
  return cert;
}

}  // namespace verigen
