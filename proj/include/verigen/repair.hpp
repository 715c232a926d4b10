#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "verigen/constraint_model.hpp"
#include "verigen/evidence.hpp"
#include "verigen/registry.hpp"

namespace verigen {

struct Violation {
  std::string id;
  enum Layer { Sem, Logic } layer = Sem;
  // Sem: element id + role/attr; Logic: unsat-core conjunct ids.
  std::string element_id;
  std::string role_or_attr;
  std::string dst_kind;  // rebind target kind, when the shape names one
  std::vector<std::string> core;
  std::string formula_id;
  std::string expected;
  std::string provenance;  // constraint record id or file ref
  bool auto_repairable = false;
};

struct RepairPlan {
  std::vector<std::string> ordered_ids;
  std::vector<std::pair<std::string, std::string>> edges_used;
  std::vector<std::string> diagnostics;  // e.g. induced-cycle fallback note
};

struct PatchResult {
  bool applied = false;
  std::string error;  // "no-unique-target", "not-auto-repairable", ...
  std::vector<std::string> edited_elements;
};

// Pluggable patcher seam. The built-in deterministic patcher rebinds
// dangling references to the unique element of the required kind and clamps
// single-variable logic violations to the nearest feasible bound.
class Patcher {
public:
  virtual ~Patcher() = default;
  virtual bool can_repair(const Violation& v, const ArtifactGraph& graph,
                          const std::vector<LinearFormula>& formulas) const = 0;
  virtual PatchResult apply(ArtifactGraph& graph, const Violation& v,
                            const std::vector<LinearFormula>& formulas) = 0;
};

std::unique_ptr<Patcher> make_builtin_patcher();

// The validation surface the repair loop works against.
struct ValidationSuite {
  std::vector<Shape> shapes;
  std::vector<LinearFormula> formulas;
  ProjectionRules projection;
};

std::vector<Violation> extract_violations(const EvidenceBundle& bundle,
                                          const Patcher& patcher,
                                          const ArtifactGraph& graph,
                                          const ValidationSuite& suite);

// Topological order respecting the lattice on the violations' provenance
// constraints; sem before logic by default; ties by violation id. A cycle
// induced by provenance edges is reported and the stratified order used.
RepairPlan plan_repairs(const std::vector<Violation>& violations,
                        const DependencyLattice& lattice);

// Re-runs only the shapes/formulas whose anchors intersect the edited
// elements. `evaluated` (when non-null) receives the constraint ids that
// were actually re-run (locality contract hook for tests).
std::vector<Violation> local_revalidate(const ArtifactGraph& graph,
                                        const std::vector<std::string>& edited_elements,
                                        const ValidationSuite& suite,
                                        const Patcher& patcher,
                                        std::vector<std::string>* evaluated = nullptr);

ConstraintRecord promote_constraint(const std::string& provenance_ref, IcmStore& store);

struct RepairOutcome {
  enum Status { Repaired, ManualReview } status = ManualReview;
  std::string artifact;
  EvidenceBundle bundle;
  std::vector<Violation> residuals;
  int iterations = 0;
  std::vector<std::string> promoted;  // record ids promoted along the way
};

struct RepairContext {
  const PrefixDfa* dfa = nullptr;
  ValidationSuite suite;
  DependencyLattice lattice;
  Patcher* patcher = nullptr;
  IcmStore* icm = nullptr;          // optional: promotion target
  Registry* registry = nullptr;     // optional: re-seal chaining
  std::string artifact_address;     // manifest key when registry present
};

// Audit-guided loop: plan -> patch sweep -> local revalidate -> full
// revalidation + re-seal (version bump). L1 acceptance is re-checked after
// every accepted patch; a patch that breaks the DFA is rolled back.
RepairOutcome run_repair_loop(const RepairContext& ctx, const std::string& artifact,
                              const EvidenceBundle& bundle, int max_iterations);

// Machine-readable ticket for one residual violation.
nlohmann::json manual_review_ticket(const Violation& v, const ArtifactGraph& graph);

}  // namespace verigen
