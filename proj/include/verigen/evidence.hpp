#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verigen/automaton.hpp"
#include "verigen/traces.hpp"
#include "verigen/validators.hpp"

namespace verigen {

// Minimal carrier for the composition laws: timestamps, a pass bit and an
// opaque payload. The typed layer traces project onto this.
struct GenericTrace {
  std::string layer;
  TraceTimes time;
  bool pass = false;
  nlohmann::json payload;
};

// Sequential composition. Enforces max(T1) before min(T2) on the logical
// clock; the verifier of the result is the conjunction.
GenericTrace compose_seq(const GenericTrace& first, const GenericTrace& second);

bool verifier(const GenericTrace& trace);

struct Seal {
  std::string digest;       // hex SHA-256
  std::uint64_t timestamp;  // logical; wall-clock annotations live on traces
};

// Composite evidence for one artifact: the three layer traces in
// composition order, enriched with audit metadata, version-tagged and
// optionally sealed.
struct EvidenceBundle {
  StructTrace struct_trace;
  SemTrace sem_trace;
  LogicTrace logic_trace;
  std::vector<std::string> composition_order;  // {"struct","sem","logic"}
  std::string version = "v1";
  std::string artifact_digest;  // hex SHA-256 of the artifact bytes

  bool audit_attached = false;
  std::string audit_automaton_id;
  nlohmann::json audit_metadata;  // step count, mask stats, timing

  std::optional<Seal> seal;

  bool verdict() const {
    return struct_trace.pass() && sem_trace.pass() && logic_trace.pass();
  }

  // Canonical serialization: sorted keys, no insignificant whitespace,
  // rationals as [num, den] pairs. `include_seal` = false is the form the
  // seal digest covers.
  std::string canonical(bool include_seal = true) const;
  nlohmann::json to_json(bool include_seal = true) const;
  static EvidenceBundle from_json(const nlohmann::json& j);
};

// Composes the three layer traces, enforcing pairwise temporal order.
EvidenceBundle compose_bundle(StructTrace struct_trace, SemTrace sem_trace,
                              LogicTrace logic_trace,
                              const std::string& artifact);

// Audit enrichment: attaches trail metadata without touching pass/fail
// state. Binds the automaton id when the trail carries none (deferred
// context binding); mismatching ids are an error.
EvidenceBundle enrich(EvidenceBundle bundle, const AuditTrail& trail);

// Temporal hash seal H(artifact || canonical bundle || timestamp).
EvidenceBundle seal_bundle(EvidenceBundle bundle, const std::string& artifact,
                           std::uint64_t timestamp);

struct VerifyOutcome {
  bool verdict = false;
  std::string failure;  // "", "seal-mismatch", "identity-mismatch",
                        // "replay-divergence", "validation-failed"
  std::string detail;
};

// Independent re-check: seal integrity, automaton identity, byte replay of
// the recorded run, then fresh semantic/logic validation (the artifact is
// projected only after the structural checks pass). Needs no access to the
// proposer.
VerifyOutcome verify_bundle(const EvidenceBundle& bundle, const std::string& artifact,
                            const PrefixDfa& dfa, const ProjectionRules& projection,
                            const std::vector<Shape>& shapes,
                            const std::vector<LinearFormula>& formulas);

// Runs every formula: anchored formulas once per element of the anchor
// kind (variables bound from numeric attributes), global formulas once.
LogicTrace run_logic_validators(const ArtifactGraph& graph,
                                const std::vector<LinearFormula>& formulas);

}  // namespace verigen
