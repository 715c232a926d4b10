#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "verigen/grammar.hpp"
#include "verigen/model_graph.hpp"
#include "verigen/validators.hpp"

namespace verigen {

inline constexpr const char* kAbstractAnchor = "<abstract>";
inline constexpr double kDefaultThetaLink = 0.85;

enum class ConstraintFamily { Structural, Semantic, Logical };
enum class ConstraintLayer { L1, L2Sem, L2Logic };
enum class ConstraintStatus { Admitted, Quarantined, Ephemeral, Promoted };

std::string family_name(ConstraintFamily f);
std::string layer_name(ConstraintLayer l);
std::string status_name(ConstraintStatus s);
ConstraintFamily family_from_string(const std::string& s);
ConstraintStatus status_from_string(const std::string& s);

// Layer is a function of family (the stratification is total).
ConstraintLayer layer_of(ConstraintFamily f);

struct StructuralBody {
  GrammarSpec grammar;
};

struct SemanticBody {
  Shape shape;
};

struct LogicalBody {
  LinearFormula formula;
};

using ConstraintBody = std::variant<StructuralBody, SemanticBody, LogicalBody>;

struct ConstraintRecord {
  std::string id;
  ConstraintFamily family = ConstraintFamily::Semantic;
  ConstraintLayer layer = ConstraintLayer::L2Sem;
  ConstraintBody body;
  std::string anchor = kAbstractAnchor;  // node id or kAbstractAnchor
  std::vector<SourceRef> provenance;
  ConstraintStatus status = ConstraintStatus::Quarantined;
  std::string quarantine_reason;
  std::vector<std::string> defines;  // symbols this record introduces
  std::vector<std::string> uses;     // symbols this record references

  nlohmann::json to_json() const;
  static ConstraintRecord from_json(const nlohmann::json& j);
};

// Persistent ICM store: one JSON file per record, filename derived from the
// record content digest. Concurrent readers, exclusive-writer admission.
class IcmStore {
public:
  explicit IcmStore(std::string dir);

  // Writes the record (no-op when the identical content already exists).
  // Returns the content address.
  std::string put(const ConstraintRecord& record);
  std::optional<ConstraintRecord> get_by_id(const std::string& record_id) const;
  // All records; promoted first, then admitted, then quarantined, each group
  // ordered by id.
  std::vector<ConstraintRecord> list() const;
  // Sets status=promoted and persists; idempotent.
  ConstraintRecord promote(const std::string& record_id);

  const std::string& dir() const { return dir_; }

private:
  std::string dir_;
  mutable std::shared_mutex mu_;
};

// ---- Channel 1: deductive extraction ----

// structural_rules document (JSON):
//   {"source_id": "...", "rules": [{"kind": <node name>,
//     "attr_ranges": {attr: [lo, hi]}, "name_pattern": "regex",
//     "grammar": {"kind": "...", "source": "...", "unfold_depth": n}}]}
// Plus: every edge of `graph` carrying cardinality bounds yields a semantic
// shape on the source node's name.
std::vector<ConstraintRecord> extract_channel1(const TypedGraph& graph,
                                               const std::string& structural_rules_json);

// ---- Channel 2: candidate admission ----

// Candidate file entry (JSON): {"target": name, "family": "semantic"|"logical",
//   "body": {...}, "confidence": x, "doc_id": "...", "para": n,
//   "defines": [...], "uses": [...]}
struct ConstraintCandidate {
  std::string target;
  ConstraintFamily family = ConstraintFamily::Semantic;
  nlohmann::json body;
  double confidence = 0.0;
  std::string doc_id;
  int para = 0;
  std::vector<std::string> defines;
  std::vector<std::string> uses;

  static ConstraintCandidate from_json(const nlohmann::json& j);
  static std::vector<ConstraintCandidate> parse_file(const std::string& text);
};

struct CompatibilityResult {
  enum Outcome { Compatible, Incompatible, Unknown } outcome = Unknown;
  // Small witness artifact (canonical text) when compatible.
  std::string witness;
  std::string reason;
};

struct CompatibilityBudget {
  int max_elements = 8;
};

// Def-style check: does some small artifact satisfy both the graph's
// Channel-1 obligations around the anchor and the record itself? Logical
// bodies are decided exactly; semantic bodies by bounded construction.
CompatibilityResult check_semantic_compatibility(const ConstraintRecord& record,
                                                 const TypedGraph& graph,
                                                 const CompatibilityBudget& budget = {});

// Full admission: align target -> anchor, parse body, compatibility-gate.
// Returns a record in every case (admitted or quarantined), never drops.
ConstraintRecord admit_candidate(const ConstraintCandidate& candidate,
                                 const TypedGraph& graph, IcmStore* store,
                                 double theta_link = kDefaultThetaLink);

// ---- dynamic (ephemeral) synthesis ----

struct SynthesisOutcome {
  std::vector<ConstraintRecord> records;  // status = Ephemeral
  std::vector<std::string> conflict_log;  // dropped candidates, with reasons
};

// Admits request-scoped candidates as ephemeral records (never persisted).
// Pairwise joint-unsat detection over logical bodies drops the later
// candidate (relaxation by request order).
SynthesisOutcome synthesize_dynamic(const std::vector<ConstraintCandidate>& request,
                                    const TypedGraph& graph,
                                    double theta_link = kDefaultThetaLink);

// ---- dependency lattice ----

struct DependencyLattice {
  std::vector<std::string> ids;
  std::map<std::string, int> family_rank;           // 0 struct, 1 sem, 2 logic
  std::vector<std::pair<std::string, std::string>> edges;  // a precedes b

  bool precedes(const std::string& a, const std::string& b) const;
};

// structural < semantic < logical by default; within a family a precedes b
// when b `uses` a symbol a `defines`. Cycles are an error naming the cycle.
DependencyLattice build_dependency_lattice(const std::vector<ConstraintRecord>& records);

}  // namespace verigen
