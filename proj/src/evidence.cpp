#include "verigen/evidence.hpp"

#include <algorithm>

#include "verigen/sha256.hpp"

namespace verigen {

using nlohmann::json;

GenericTrace compose_seq(const GenericTrace& first, const GenericTrace& second) {
  if (second.time.begin < first.time.end) {
    throw Error("temporal-order-violation",
                second.layer + " began at " + std::to_string(second.time.begin) +
                    " before " + first.layer + " finished at " +
                    std::to_string(first.time.end));
  }
  GenericTrace out;
  out.layer = first.layer + "*" + second.layer;
  out.time.begin = first.time.begin;
  out.time.end = second.time.end;
  out.time.wall_begin_ns = first.time.wall_begin_ns;
  out.time.wall_end_ns = second.time.wall_end_ns;
  out.pass = first.pass && second.pass;
  out.payload = json::array({first.payload, second.payload});
  return out;
}

bool verifier(const GenericTrace& trace) { return trace.pass; }

namespace {

json times_to_json(const TraceTimes& t) {
  json j;
  j["t0"] = t.begin;
  j["t1"] = t.end;
  j["wall0_ns"] = t.wall_begin_ns;
  j["wall1_ns"] = t.wall_end_ns;
  return j;
}

TraceTimes times_from_json(const json& j) {
  TraceTimes t;
  t.begin = j.at("t0").get<std::uint64_t>();
  t.end = j.at("t1").get<std::uint64_t>();
  t.wall_begin_ns = j.at("wall0_ns").get<std::uint64_t>();
  t.wall_end_ns = j.at("wall1_ns").get<std::uint64_t>();
  return t;
}

json struct_to_json(const StructTrace& t) {
  json j;
  j["run"] = t.run;
  j["accepted"] = t.accepted;
  j["automaton_id"] = t.automaton_id;
  j["closure_events"] = t.closure_events;
  j["closure_suffix"] = escape_bytes(t.closure_suffix);
  j["max_steps_exhausted"] = t.max_steps_exhausted;
  j["time"] = times_to_json(t.time);
  return j;
}

StructTrace struct_from_json(const json& j) {
  StructTrace t;
  t.run = j.at("run").get<std::vector<int>>();
  t.accepted = j.at("accepted").get<bool>();
  t.automaton_id = j.at("automaton_id").get<std::string>();
  t.closure_events = j.at("closure_events").get<int>();
  t.closure_suffix = unescape_bytes(j.at("closure_suffix").get<std::string>());
  t.max_steps_exhausted = j.at("max_steps_exhausted").get<bool>();
  t.time = times_from_json(j.at("time"));
  return t;
}

json sem_to_json(const SemTrace& t) {
  json j;
  j["shapes_checked"] = t.shapes_checked;
  json vs = json::array();
  for (const auto& v : t.violations) {
    vs.push_back({{"shape_id", v.shape_id},
                  {"element_id", v.element_id},
                  {"path", v.path},
                  {"expected", v.expected},
                  {"provenance", v.provenance}});
  }
  j["violations"] = std::move(vs);
  j["pass"] = t.pass();
  j["time"] = times_to_json(t.time);
  return j;
}

SemTrace sem_from_json(const json& j) {
  SemTrace t;
  t.shapes_checked = j.at("shapes_checked").get<std::vector<std::string>>();
  for (const auto& vj : j.at("violations")) {
    SemViolation v;
    v.shape_id = vj.at("shape_id").get<std::string>();
    v.element_id = vj.at("element_id").get<std::string>();
    v.path = vj.at("path").get<std::string>();
    v.expected = vj.at("expected").get<std::string>();
    v.provenance = vj.at("provenance").get<std::string>();
    t.violations.push_back(std::move(v));
  }
  t.time = times_from_json(j.at("time"));
  return t;
}

json cert_to_json(const LogicCert& c) {
  json j;
  j["formula_id"] = c.formula_id;
  j["element_id"] = c.element_id;
  j["provenance"] = c.provenance;
  j["outcome"] = c.sat ? "sat" : "unsat";
  if (c.sat) {
    json model;
    for (const auto& [var, val] : c.model) model[var] = rational_to_json(val);
    j["model"] = std::move(model);
  } else {
    j["core"] = c.core;
    json farkas;
    for (const auto& [atom, mult] : c.farkas) farkas[atom] = rational_to_json(mult);
    j["farkas"] = std::move(farkas);
  }
  j["time"] = times_to_json(c.time);
  return j;
}

LogicCert cert_from_json(const json& j) {
  LogicCert c;
  c.formula_id = j.at("formula_id").get<std::string>();
  c.element_id = j.at("element_id").get<std::string>();
  c.provenance = j.at("provenance").get<std::string>();
  c.sat = j.at("outcome").get<std::string>() == "sat";
  if (c.sat) {
    for (auto it = j.at("model").begin(); it != j.at("model").end(); ++it) {
      c.model[it.key()] = rational_from_json(it.value());
    }
  } else {
    c.core = j.at("core").get<std::vector<std::string>>();
    for (auto it = j.at("farkas").begin(); it != j.at("farkas").end(); ++it) {
      c.farkas[it.key()] = rational_from_json(it.value());
    }
  }
  c.time = times_from_json(j.at("time"));
  return c;
}

}  // namespace

json EvidenceBundle::to_json(bool include_seal) const {
  json j;
  j["struct"] = struct_to_json(struct_trace);
  json certs = json::array();
  for (const auto& c : logic_trace.certs) certs.push_back(cert_to_json(c));
  j["logic"] = {{"certs", std::move(certs)},
                {"pass", logic_trace.pass()},
                {"time", times_to_json(logic_trace.time)}};
  j["sem"] = sem_to_json(sem_trace);
  j["composition_order"] = composition_order;
  j["version"] = version;
  j["artifact_sha256"] = artifact_digest;
  j["verdict"] = verdict();
  if (audit_attached) {
    j["audit"] = {{"automaton_id", audit_automaton_id}, {"metadata", audit_metadata}};
  }
  if (include_seal && seal) {
    j["seal"] = {{"digest", seal->digest}, {"timestamp", seal->timestamp}};
  }
  return j;
}

std::string EvidenceBundle::canonical(bool include_seal) const {
  return to_json(include_seal).dump();
}

EvidenceBundle EvidenceBundle::from_json(const json& j) {
  EvidenceBundle b;
  b.struct_trace = struct_from_json(j.at("struct"));
  b.sem_trace = sem_from_json(j.at("sem"));
  for (const auto& cj : j.at("logic").at("certs")) {
    b.logic_trace.certs.push_back(cert_from_json(cj));
  }
  b.logic_trace.time = times_from_json(j.at("logic").at("time"));
  b.composition_order = j.at("composition_order").get<std::vector<std::string>>();
  b.version = j.at("version").get<std::string>();
  b.artifact_digest = j.at("artifact_sha256").get<std::string>();
  if (j.contains("audit")) {
    b.audit_attached = true;
    b.audit_automaton_id = j.at("audit").at("automaton_id").get<std::string>();
    b.audit_metadata = j.at("audit").at("metadata");
  }
  if (j.contains("seal")) {
    Seal s;
    s.digest = j.at("seal").at("digest").get<std::string>();
    s.timestamp = j.at("seal").at("timestamp").get<std::uint64_t>();
    b.seal = s;
  }
  // The wire format is the canonical serialization, byte for byte. Anything
  // the rebuild would normalize away (junk keys, inconsistent derived
  // fields, a renamed seal block) is tamper, not tolerance.
  if (j.dump() != b.to_json(b.seal.has_value()).dump()) {
    throw Error("bundle-invalid",
                "bundle is not in canonical form (fields inconsistent or unknown)");
  }
  return b;
}

EvidenceBundle compose_bundle(StructTrace struct_trace, SemTrace sem_trace,
                              LogicTrace logic_trace, const std::string& artifact) {
  // Enforce the ordering condition pairwise (struct before sem before logic).
  if (sem_trace.time.begin < struct_trace.time.end) {
    throw Error("temporal-order-violation",
                "semantic trace began before the structural trace finished");
  }
  if (logic_trace.time.begin < sem_trace.time.end) {
    throw Error("temporal-order-violation",
                "logic trace began before the semantic trace finished");
  }
  EvidenceBundle b;
  b.struct_trace = std::move(struct_trace);
  b.sem_trace = std::move(sem_trace);
  b.logic_trace = std::move(logic_trace);
  b.composition_order = {"struct", "sem", "logic"};
  b.artifact_digest = Sha256::hex_digest(artifact);
  return b;
}

EvidenceBundle enrich(EvidenceBundle bundle, const AuditTrail& trail) {
  if (!trail.automaton_id.empty() &&
      trail.automaton_id != bundle.struct_trace.automaton_id) {
    throw Error("automaton-id-mismatch",
                "trail is bound to a different automaton than the struct trace");
  }
  bundle.audit_attached = true;
  bundle.audit_automaton_id = bundle.struct_trace.automaton_id;

  json meta;
  meta["mode"] = audit_mode_name(trail.mode);
  meta["steps"] = trail.tuples.size();
  meta["events"] = trail.events.size();
  if (!trail.tuples.empty()) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t total_ns = 0;
    for (const auto& t : trail.tuples) {
      sizes.push_back(t.allowed_count);
      total_ns += t.latency_ns;
    }
    std::sort(sizes.begin(), sizes.end());
    meta["mask_min"] = sizes.front();
    meta["mask_max"] = sizes.back();
    meta["mask_median"] = sizes[sizes.size() / 2];
    meta["total_latency_ns"] = total_ns;
  }
  bundle.audit_metadata = std::move(meta);
  return bundle;
}

EvidenceBundle seal_bundle(EvidenceBundle bundle, const std::string& artifact,
                           std::uint64_t timestamp) {
  if (bundle.seal) throw Error("already-sealed", "bundle already carries a seal");
  Seal s;
  s.timestamp = timestamp;
  Sha256 h;
  h.update_framed(artifact);
  h.update_framed(bundle.canonical(false));
  h.update_framed(std::to_string(timestamp));
  auto digest = h.finish();
  s.digest = to_hex(std::string(reinterpret_cast<const char*>(digest.data()), digest.size()));
  bundle.seal = s;
  return bundle;
}

LogicTrace run_logic_validators(const ArtifactGraph& graph,
                                const std::vector<LinearFormula>& formulas) {
  LogicTrace trace;
  trace.time = TraceTimes::open();
  for (const LinearFormula& f : formulas) {
    if (f.anchor_kind.empty()) {
      trace.certs.push_back(validate_logic(f, {}));
      continue;
    }
    for (const ArtifactElement& el : graph.elements) {
      if (el.kind != f.anchor_kind) continue;
      std::map<std::string, Rational> bindings;
      for (const std::string& var : f.variables) {
        auto it = el.numeric_attrs.find(var);
        if (it != el.numeric_attrs.end()) bindings[var] = it->second;
      }
      LogicCert cert = validate_logic(f, bindings);
      cert.element_id = el.id;
      trace.certs.push_back(std::move(cert));
    }
  }
  trace.time.close();
  return trace;
}

VerifyOutcome verify_bundle(const EvidenceBundle& bundle, const std::string& artifact,
                            const PrefixDfa& dfa, const ProjectionRules& projection,
                            const std::vector<Shape>& shapes,
                            const std::vector<LinearFormula>& formulas) {
  VerifyOutcome out;

  // 1. Seal integrity (when sealed): recompute over the artifact and the
  // seal-free canonical form.
  if (bundle.seal) {
    Sha256 h;
    h.update_framed(artifact);
    h.update_framed(bundle.canonical(false));
    h.update_framed(std::to_string(bundle.seal->timestamp));
    auto digest = h.finish();
    std::string expect =
        to_hex(std::string(reinterpret_cast<const char*>(digest.data()), digest.size()));
    if (expect != bundle.seal->digest) {
      out.failure = "seal-mismatch";
      out.detail = "seal digest does not match artifact + bundle + timestamp";
      return out;
    }
  }
  if (Sha256::hex_digest(artifact) != bundle.artifact_digest) {
    out.failure = "replay-divergence";
    out.detail = "artifact bytes differ from the digest recorded in the bundle";
    return out;
  }

  // 2. Automaton identity: the caller-supplied DFA must be compiled from
  // the identical source.
  if (dfa.automaton_id() != bundle.struct_trace.automaton_id) {
    out.failure = "identity-mismatch";
    out.detail = "supplied grammar hashes to a different automaton_id";
    return out;
  }

  // 3. Replay the recorded run byte by byte.
  std::vector<int> replay;
  try {
    replay = dfa.run(artifact);
  } catch (const Error& e) {
    out.failure = "replay-divergence";
    out.detail = e.what();
    return out;
  }
  if (replay != bundle.struct_trace.run ||
      !dfa.accepting(replay.back())) {
    out.failure = "replay-divergence";
    out.detail = "recorded run does not match the artifact replay";
    return out;
  }

  // 4. Fresh semantic and logic validation must pass.
  ArtifactGraph graph;
  try {
    graph = project_artifact(artifact, projection);
  } catch (const Error& e) {
    // Artifacts under non-JSON grammars have no graph projection; with no
    // L2 constraints configured there is nothing to validate.
    if (!shapes.empty() || !formulas.empty()) {
      out.failure = "validation-failed";
      out.detail = e.what();
      return out;
    }
  }
  SemTrace sem = validate_semantic(graph, shapes);
  LogicTrace logic = run_logic_validators(graph, formulas);
  bool fresh_pass = sem.pass() && logic.pass();
  out.verdict = fresh_pass && bundle.verdict();
  if (!out.verdict) {
    out.failure = "validation-failed";
    out.detail = fresh_pass ? "bundle records a failing trace"
                            : "re-validation reproduces failures";
  }
  return out;
}

}  // namespace verigen
