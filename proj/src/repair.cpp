#include "verigen/repair.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "verigen/sha256.hpp"

namespace verigen {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string escape_pointer_token(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

const Shape* find_shape(const ValidationSuite& suite, const std::string& shape_id) {
  for (const Shape& s : suite.shapes) {
    if (s.id == shape_id) return &s;
  }
  return nullptr;
}


std::vector<Violation> violations_from_traces(const SemTrace& sem,
                                              const LogicTrace& logic,
                                              const Patcher& patcher,
                                              const ArtifactGraph& graph,
                                              const ValidationSuite& suite) {
  std::vector<Violation> out;
  int n = 0;
  for (const SemViolation& sv : sem.violations) {
    Violation v;
    v.id = "v-sem-" + std::to_string(n++);
    v.layer = Violation::Sem;
    v.element_id = sv.element_id;
    // path is "element / role-or-attr"
    auto sep = sv.path.rfind(" / ");
    v.role_or_attr = sep == std::string::npos ? sv.path : sv.path.substr(sep + 3);
    v.expected = sv.expected;
    v.provenance = sv.provenance;
    if (const Shape* s = find_shape(suite, sv.shape_id)) {
      for (const ShapeRequirement& r : s->requirements) {
        if (r.kind == ShapeRequirement::RefExists && r.role == v.role_or_attr) {
          v.dst_kind = r.dst_kind;
        }
      }
    }
    v.auto_repairable = patcher.can_repair(v, graph, suite.formulas);
    out.push_back(std::move(v));
  }
  for (const LogicCert& cert : logic.certs) {
    if (cert.sat) continue;
    Violation v;
    v.id = "v-log-" + std::to_string(n++);
    v.layer = Violation::Logic;
    v.element_id = cert.element_id;
    v.formula_id = cert.formula_id;
    v.core = cert.core;
    v.expected = "formula '" + cert.formula_id + "' must be satisfiable";
    v.provenance = cert.provenance;
    v.auto_repairable = patcher.can_repair(v, graph, suite.formulas);
    out.push_back(std::move(v));
  }
  return out;
}

// Single variable mentioned by the core's formula conjuncts, or empty.
std::string core_single_variable(const Violation& v, const LinearFormula& formula) {
  std::set<std::string> vars;
  for (const LinearConjunct& c : formula.conjuncts) {
    if (std::find(v.core.begin(), v.core.end(), c.id) == v.core.end()) continue;
    for (const auto& [var, coeff] : c.terms) {
      (void)coeff;
      vars.insert(var);
    }
  }
  return vars.size() == 1 ? *vars.begin() : std::string();
}

// Feasible closed interval for `var` under the core's formula conjuncts
// (bindings excluded). Returns false when empty or not interval-shaped.
bool core_interval(const Violation& v, const LinearFormula& formula,
                   const std::string& var, std::optional<Rational>& lo,
                   std::optional<Rational>& hi) {
  lo.reset();
  hi.reset();
  for (const LinearConjunct& c : formula.conjuncts) {
    if (std::find(v.core.begin(), v.core.end(), c.id) == v.core.end()) continue;
    auto it = c.terms.find(var);
    if (it == c.terms.end() || c.terms.size() != 1) return false;
    Rational a = it->second;
    if (a.is_zero()) return false;
    Rational bound = c.rhs / a;
    bool upper = (c.op == LinearConjunct::Le) == a.is_positive();
    if (c.op == LinearConjunct::Eq) {
      if ((!lo || *lo <= bound) && (!hi || bound <= *hi)) {
        lo = bound;
        hi = bound;
        continue;
      }
      return false;
    }
    if (upper) {
      if (!hi || bound < *hi) hi = bound;
    } else {
      if (!lo || bound > *lo) lo = bound;
    }
  }
  if (lo && hi && *hi < *lo) return false;
  return true;
}

class BuiltinPatcher : public Patcher {
public:
  bool can_repair(const Violation& v, const ArtifactGraph& graph,
                  const std::vector<LinearFormula>& formulas) const override {
    if (v.layer == Violation::Sem) {
      // Rebinding needs an existing dangling reference and a named target
      // kind; attribute violations have no safe automatic fix.
      if (v.dst_kind.empty()) return false;
      for (const ArtifactReference& r : graph.references) {
        if (r.src == v.element_id && r.role == v.role_or_attr && r.dangling) {
          return true;
        }
      }
      return false;
    }
    const LinearFormula* formula = nullptr;
    for (const LinearFormula& f : formulas) {
      if (f.id == v.formula_id) formula = &f;
    }
    if (formula == nullptr) return false;
    std::string var = core_single_variable(v, *formula);
    if (var.empty()) return false;
    std::optional<Rational> lo, hi;
    if (!core_interval(v, *formula, var, lo, hi)) return false;
    return clamp_target(graph, v, var, lo, hi).has_value();
  }

  PatchResult apply(ArtifactGraph& graph, const Violation& v,
                    const std::vector<LinearFormula>& formulas) override {
    PatchResult result;
    if (v.layer == Violation::Sem) {
      return rebind(graph, v);
    }
    const LinearFormula* formula = nullptr;
    for (const LinearFormula& f : formulas) {
      if (f.id == v.formula_id) formula = &f;
    }
    if (formula == nullptr) {
      result.error = "not-auto-repairable";
      return result;
    }
    std::string var = core_single_variable(v, *formula);
    std::optional<Rational> lo, hi;
    if (var.empty() || !core_interval(v, *formula, var, lo, hi)) {
      result.error = "not-auto-repairable";
      return result;
    }
    std::optional<Rational> target = clamp_target(graph, v, var, lo, hi);
    ArtifactElement* el = graph.find(v.element_id);
    if (!target || el == nullptr) {
      result.error = "not-auto-repairable";
      return result;
    }
    el->numeric_attrs[var] = *target;
    ordered_json::json_pointer ptr(el->json_pointer + "/" +
                                   escape_pointer_token(var));
    graph.doc[ptr] = target->num();  // integral by construction
    result.applied = true;
    result.edited_elements = {v.element_id};
    return result;
  }

private:
  // Nearest feasible integer to the element's current value within [lo, hi].
  static std::optional<Rational> clamp_target(const ArtifactGraph& graph,
                                              const Violation& v,
                                              const std::string& var,
                                              const std::optional<Rational>& lo,
                                              const std::optional<Rational>& hi) {
    const ArtifactElement* el = graph.find(v.element_id);
    if (el == nullptr) return std::nullopt;
    auto cur_it = el->numeric_attrs.find(var);
    if (cur_it == el->numeric_attrs.end()) return std::nullopt;
    Rational cur = cur_it->second;
    Rational target = cur;
    if (lo && target < *lo) target = *lo;
    if (hi && target > *hi) target = *hi;
    if (target.den() != 1) {
      // Serialized attributes are integers; snap inward to the nearest
      // integer that stays inside the interval.
      std::int64_t floor_v = target.num() >= 0 ? target.num() / target.den()
                                               : -((-target.num() + target.den() - 1) / target.den());
      for (std::int64_t candidate : {floor_v, floor_v + 1}) {
        Rational r(candidate);
        if ((!lo || *lo <= r) && (!hi || r <= *hi)) return r;
      }
      return std::nullopt;
    }
    return target;
  }

  static PatchResult rebind(ArtifactGraph& graph, const Violation& v) {
    PatchResult result;
    // Unique element of the required kind.
    std::vector<const ArtifactElement*> targets;
    for (const ArtifactElement& el : graph.elements) {
      if (el.kind == v.dst_kind) targets.push_back(&el);
    }
    if (targets.size() != 1) {
      result.error = "no-unique-target";
      return result;
    }
    for (ArtifactReference& r : graph.references) {
      if (r.src == v.element_id && r.role == v.role_or_attr && r.dangling) {
        r.dst = targets.front()->id;
        r.dangling = false;
        ordered_json::json_pointer ptr(r.json_pointer);
        graph.doc[ptr] = r.dst;
        result.applied = true;
        result.edited_elements = {v.element_id};
        return result;
      }
    }
    result.error = "not-auto-repairable";
    return result;
  }
};

}  // namespace

std::unique_ptr<Patcher> make_builtin_patcher() {
  return std::make_unique<BuiltinPatcher>();
}

std::vector<Violation> extract_violations(const EvidenceBundle& bundle,
                                          const Patcher& patcher,
                                          const ArtifactGraph& graph,
                                          const ValidationSuite& suite) {
  return violations_from_traces(bundle.sem_trace, bundle.logic_trace, patcher,
                                graph, suite);
}

RepairPlan plan_repairs(const std::vector<Violation>& violations,
                        const DependencyLattice& lattice) {
  RepairPlan plan;
  auto rank_of = [&](const Violation& v) {
    auto it = lattice.family_rank.find(v.provenance);
    if (it != lattice.family_rank.end()) return it->second;
    return v.layer == Violation::Sem ? 1 : 2;
  };

  // Edges between violations from lattice precedence of their provenance.
  std::map<std::string, const Violation*> by_id;
  for (const Violation& v : violations) by_id[v.id] = &v;
  std::map<std::string, std::vector<std::string>> succ;
  std::map<std::string, int> indegree;
  for (const Violation& v : violations) indegree[v.id] = 0;
  for (const Violation& a : violations) {
    for (const Violation& b : violations) {
      if (a.id == b.id || a.provenance == b.provenance) continue;
      if (a.provenance.empty() || b.provenance.empty()) continue;
      bool edge = false;
      for (const auto& [from, to] : lattice.edges) {
        if (from == a.provenance && to == b.provenance) edge = true;
      }
      if (edge) {
        succ[a.id].push_back(b.id);
        ++indegree[b.id];
        plan.edges_used.emplace_back(a.id, b.id);
      }
    }
  }

  // Kahn with a deterministic ready queue: (rank, id).
  auto cmp = [&](const std::string& x, const std::string& y) {
    int rx = rank_of(*by_id.at(x));
    int ry = rank_of(*by_id.at(y));
    if (rx != ry) return rx > ry;  // min-heap
    return x > y;
  };
  std::priority_queue<std::string, std::vector<std::string>, decltype(cmp)> ready(cmp);
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::map<std::string, int> remaining = indegree;
  while (!ready.empty()) {
    std::string cur = ready.top();
    ready.pop();
    plan.ordered_ids.push_back(cur);
    for (const std::string& nxt : succ[cur]) {
      if (--remaining[nxt] == 0) ready.push(nxt);
    }
  }
  if (plan.ordered_ids.size() != violations.size()) {
    // Provenance edges formed a cycle; fall back to the stratified order.
    plan.diagnostics.push_back("induced-cycle: fell back to stratified order");
    plan.ordered_ids.clear();
    plan.edges_used.clear();
    std::vector<const Violation*> sorted;
    for (const Violation& v : violations) sorted.push_back(&v);
    std::sort(sorted.begin(), sorted.end(),
              [&](const Violation* a, const Violation* b) {
                int ra = rank_of(*a), rb = rank_of(*b);
                if (ra != rb) return ra < rb;
                return a->id < b->id;
              });
    for (const Violation* v : sorted) plan.ordered_ids.push_back(v->id);
  }
  return plan;
}

std::vector<Violation> local_revalidate(const ArtifactGraph& graph,
                                        const std::vector<std::string>& edited_elements,
                                        const ValidationSuite& suite,
                                        const Patcher& patcher,
                                        std::vector<std::string>* evaluated) {
  std::set<std::string> edited_kinds;
  std::set<std::string> edited_ids(edited_elements.begin(), edited_elements.end());
  for (const std::string& id : edited_elements) {
    if (const ArtifactElement* el = graph.find(id)) edited_kinds.insert(el->kind);
  }

  ValidationSuite local;
  local.projection = suite.projection;
  for (const Shape& s : suite.shapes) {
    bool touches = edited_kinds.count(s.target_kind) != 0;
    if (!touches) {
      // An edited element may be the target of a reference held by an
      // element this shape governs.
      for (const ArtifactReference& r : graph.references) {
        if (edited_ids.count(r.dst) == 0) continue;
        const ArtifactElement* src = graph.find(r.src);
        if (src != nullptr && src->kind == s.target_kind) touches = true;
      }
    }
    if (touches) {
      local.shapes.push_back(s);
      if (evaluated != nullptr) evaluated->push_back(s.id);
    }
  }
  for (const LinearFormula& f : suite.formulas) {
    if (!f.anchor_kind.empty() && edited_kinds.count(f.anchor_kind) != 0) {
      local.formulas.push_back(f);
      if (evaluated != nullptr) evaluated->push_back(f.id);
    }
  }

  SemTrace sem = validate_semantic(graph, local.shapes);
  LogicTrace logic = run_logic_validators(graph, local.formulas);
  // Residuals are scoped to the edited elements.
  std::vector<Violation> all =
      violations_from_traces(sem, logic, patcher, graph, suite);
  std::vector<Violation> residuals;
  for (Violation& v : all) {
    if (v.element_id.empty() || edited_ids.count(v.element_id) != 0) {
      residuals.push_back(std::move(v));
    }
  }
  return residuals;
}

ConstraintRecord promote_constraint(const std::string& provenance_ref,
                                    IcmStore& store) {
  return store.promote(provenance_ref);
}

json manual_review_ticket(const Violation& v, const ArtifactGraph& graph) {
  json t;
  t["id"] = v.id;
  t["layer"] = v.layer == Violation::Sem ? "sem" : "logic";
  if (v.layer == Violation::Sem) {
    t["locator"] = v.element_id + " / " + v.role_or_attr;
  } else {
    t["locator"] = v.core;
    t["formula_id"] = v.formula_id;
    if (!v.element_id.empty()) t["element_id"] = v.element_id;
  }
  t["expected"] = v.expected;
  t["provenance"] = v.provenance;
  json suggestions = json::array();
  if (!v.dst_kind.empty()) {
    for (const ArtifactElement& el : graph.elements) {
      if (el.kind == v.dst_kind) suggestions.push_back(el.id);
    }
  }
  t["suggested_candidates"] = std::move(suggestions);
  return t;
}

RepairOutcome run_repair_loop(const RepairContext& ctx, const std::string& artifact,
                              const EvidenceBundle& bundle, int max_iterations) {
  if (max_iterations < 1) {
    throw Error("policy-invalid", "max_iterations must be >= 1");
  }
  if (ctx.dfa == nullptr || ctx.patcher == nullptr) {
    throw Error("policy-invalid", "repair context needs a dfa and a patcher");
  }

  RepairOutcome out;
  out.bundle = bundle;
  out.artifact = artifact;
  ArtifactGraph graph = project_artifact(artifact, ctx.suite.projection);
  int version = 1;
  if (bundle.version.size() > 1 && bundle.version[0] == 'v') {
    version = std::stoi(bundle.version.substr(1));
  }

  for (int iter = 1; iter <= max_iterations; ++iter) {
    SemTrace sem = validate_semantic(graph, ctx.suite.shapes);
    LogicTrace logic = run_logic_validators(graph, ctx.suite.formulas);
    std::vector<Violation> violations =
        violations_from_traces(sem, logic, *ctx.patcher, graph, ctx.suite);
    if (violations.empty() && iter == 1 && bundle.verdict()) {
      out.status = RepairOutcome::Repaired;
      out.iterations = 0;
      return out;
    }

    out.iterations = iter;
    RepairPlan plan = plan_repairs(violations, ctx.lattice);
    std::map<std::string, const Violation*> by_id;
    for (const Violation& v : violations) by_id[v.id] = &v;

    bool any_applied = false;
    for (const std::string& vid : plan.ordered_ids) {
      const Violation& v = *by_id.at(vid);
      if (!v.auto_repairable) continue;  // sweep finishes; ticket comes later
      ArtifactGraph snapshot = graph;
      PatchResult patch = ctx.patcher->apply(graph, v, ctx.suite.formulas);
      if (!patch.applied) continue;
      // Structural preservation: the patched serialization must still be
      // DFA-accepted, else the patch is rolled back.
      if (!ctx.dfa->accepts(graph.serialize())) {
        graph = std::move(snapshot);
        continue;
      }
      any_applied = true;
      if (ctx.icm != nullptr && !v.provenance.empty()) {
        try {
          ctx.icm->promote(v.provenance);
          out.promoted.push_back(v.provenance);
        } catch (const Error& e) {
          if (e.code() != "unknown-provenance") throw;
          // File-backed constraints have no store entry to promote.
        }
      }
      // Local revalidation after each patch; the sweep finishes regardless
      // and the full revalidation below gathers all residual tickets.
      local_revalidate(graph, patch.edited_elements, ctx.suite, *ctx.patcher);
    }

    // Full revalidation and re-seal with a version bump.
    std::string new_artifact = graph.serialize();
    StructTrace st;
    st.time = TraceTimes::open();
    st.run = ctx.dfa->run(new_artifact);
    st.accepted = ctx.dfa->accepting(st.run.back());
    st.automaton_id = ctx.dfa->automaton_id();
    st.time.close();
    SemTrace sem2 = validate_semantic(graph, ctx.suite.shapes);
    LogicTrace logic2 = run_logic_validators(graph, ctx.suite.formulas);
    EvidenceBundle next = compose_bundle(std::move(st), std::move(sem2),
                                         std::move(logic2), new_artifact);
    ++version;
    next.version = "v" + std::to_string(version);
    next = seal_bundle(std::move(next), new_artifact, next_logical_time());
    if (ctx.registry != nullptr) {
      std::string artifact_addr = ctx.registry->append(new_artifact);
      std::string bundle_addr = ctx.registry->append(next.canonical());
      ctx.registry->manifest_append({artifact_addr, bundle_addr, next.version});
      if (next.verdict()) {
        ctx.registry->manifest_append({artifact_addr, bundle_addr, "final"});
      }
    }
    out.artifact = new_artifact;

    if (next.verdict()) {
      out.bundle = next;
      out.status = RepairOutcome::Repaired;
      out.residuals.clear();
      return out;
    }
    out.residuals = violations_from_traces(next.sem_trace, next.logic_trace,
                                           *ctx.patcher, graph, ctx.suite);
    out.bundle = std::move(next);
    if (!any_applied) break;  // no progress; further iterations change nothing
  }
  out.status = RepairOutcome::ManualReview;
  return out;
}

}  // namespace verigen
