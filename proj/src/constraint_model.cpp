#include "verigen/constraint_model.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <queue>
#include <sstream>

#include "verigen/sha256.hpp"

namespace verigen {

namespace fs = std::filesystem;
using nlohmann::json;

std::string family_name(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::Structural: return "structural";
    case ConstraintFamily::Semantic: return "semantic";
    case ConstraintFamily::Logical: return "logical";
  }
  return "?";
}

std::string layer_name(ConstraintLayer l) {
  switch (l) {
    case ConstraintLayer::L1: return "L1";
    case ConstraintLayer::L2Sem: return "L2-sem";
    case ConstraintLayer::L2Logic: return "L2-logic";
  }
  return "?";
}

std::string status_name(ConstraintStatus s) {
  switch (s) {
    case ConstraintStatus::Admitted: return "admitted";
    case ConstraintStatus::Quarantined: return "quarantined";
    case ConstraintStatus::Ephemeral: return "ephemeral";
    case ConstraintStatus::Promoted: return "promoted";
  }
  return "?";
}

ConstraintFamily family_from_string(const std::string& s) {
  if (s == "structural") return ConstraintFamily::Structural;
  if (s == "semantic") return ConstraintFamily::Semantic;
  if (s == "logical") return ConstraintFamily::Logical;
  throw Error("candidate-invalid", "unknown family '" + s + "'");
}

ConstraintStatus status_from_string(const std::string& s) {
  if (s == "admitted") return ConstraintStatus::Admitted;
  if (s == "quarantined") return ConstraintStatus::Quarantined;
  if (s == "ephemeral") return ConstraintStatus::Ephemeral;
  if (s == "promoted") return ConstraintStatus::Promoted;
  throw Error("record-invalid", "unknown status '" + s + "'");
}

ConstraintLayer layer_of(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::Structural: return ConstraintLayer::L1;
    case ConstraintFamily::Semantic: return ConstraintLayer::L2Sem;
    case ConstraintFamily::Logical: return ConstraintLayer::L2Logic;
  }
  return ConstraintLayer::L2Sem;
}

json ConstraintRecord::to_json() const {
  json j;
  j["id"] = id;
  j["family"] = family_name(family);
  j["layer"] = layer_name(layer);
  j["anchor"] = anchor;
  j["status"] = status_name(status);
  if (!quarantine_reason.empty()) j["quarantine_reason"] = quarantine_reason;
  json prov = json::array();
  for (const auto& p : provenance) {
    prov.push_back({{"source_id", p.source_id}, {"locator", p.locator}});
  }
  j["provenance"] = std::move(prov);
  if (!defines.empty()) j["defines"] = defines;
  if (!uses.empty()) j["uses"] = uses;
  if (const auto* sb = std::get_if<StructuralBody>(&body)) {
    j["body"] = {{"grammar_kind", grammar_kind_name(sb->grammar.kind)},
                 {"source", sb->grammar.source},
                 {"unfold_depth", sb->grammar.unfold_depth}};
  } else if (const auto* mb = std::get_if<SemanticBody>(&body)) {
    j["body"] = mb->shape.to_json();
  } else if (const auto* lb = std::get_if<LogicalBody>(&body)) {
    j["body"] = lb->formula.to_json();
  }
  return j;
}

ConstraintRecord ConstraintRecord::from_json(const json& j) {
  ConstraintRecord r;
  r.id = j.at("id").get<std::string>();
  r.family = family_from_string(j.at("family").get<std::string>());
  r.layer = layer_of(r.family);
  r.anchor = j.at("anchor").get<std::string>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.quarantine_reason = j.value("quarantine_reason", std::string());
  for (const auto& p : j.value("provenance", json::array())) {
    r.provenance.push_back(SourceRef{p.at("source_id").get<std::string>(),
                                     p.at("locator").get<std::string>()});
  }
  for (const auto& d : j.value("defines", json::array())) {
    r.defines.push_back(d.get<std::string>());
  }
  for (const auto& u : j.value("uses", json::array())) {
    r.uses.push_back(u.get<std::string>());
  }
  const json& b = j.at("body");
  switch (r.family) {
    case ConstraintFamily::Structural: {
      StructuralBody sb;
      sb.grammar.kind = grammar_kind_from_string(b.at("grammar_kind").get<std::string>());
      sb.grammar.source = b.at("source").get<std::string>();
      sb.grammar.unfold_depth = b.value("unfold_depth", 8);
      r.body = std::move(sb);
      break;
    }
    case ConstraintFamily::Semantic:
      r.body = SemanticBody{Shape::from_json(b)};
      break;
    case ConstraintFamily::Logical:
      r.body = LogicalBody{LinearFormula::from_json(b)};
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// IcmStore
// ---------------------------------------------------------------------------

IcmStore::IcmStore(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::string IcmStore::put(const ConstraintRecord& record) {
  if (record.status == ConstraintStatus::Ephemeral) {
    throw Error("record-invalid", "ephemeral records are never persisted");
  }
  std::string canonical = record.to_json().dump();
  std::string address = Sha256::hex_digest(canonical);
  std::unique_lock lock(mu_);
  fs::path path = fs::path(dir_) / (address + ".json");
  if (fs::exists(path)) return address;
  fs::path tmp = fs::path(dir_) / ("tmp." + address);
  {
    std::ofstream out(tmp, std::ios::binary);
    out << canonical;
  }
  fs::rename(tmp, path);
  return address;
}

std::optional<ConstraintRecord> IcmStore::get_by_id(const std::string& record_id) const {
  // Promoted copy wins over the originally admitted one.
  std::optional<ConstraintRecord> found;
  for (const ConstraintRecord& r : list()) {
    if (r.id == record_id) {
      if (!found || r.status == ConstraintStatus::Promoted) found = r;
    }
  }
  return found;
}

std::vector<ConstraintRecord> IcmStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<ConstraintRecord> records;
  if (!fs::exists(dir_)) return records;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    records.push_back(ConstraintRecord::from_json(json::parse(buf.str())));
  }
  auto rank = [](ConstraintStatus s) {
    switch (s) {
      case ConstraintStatus::Promoted: return 0;
      case ConstraintStatus::Admitted: return 1;
      case ConstraintStatus::Quarantined: return 2;
      case ConstraintStatus::Ephemeral: return 3;
    }
    return 4;
  };
  std::sort(records.begin(), records.end(),
            [&](const ConstraintRecord& a, const ConstraintRecord& b) {
              int ra = rank(a.status), rb = rank(b.status);
              if (ra != rb) return ra < rb;
              return a.id < b.id;
            });
  // A record promoted later exists twice on disk (append-only store); keep
  // the promoted copy in listings.
  std::vector<ConstraintRecord> dedup;
  std::set<std::string> seen;
  for (auto& r : records) {
    if (seen.insert(r.id).second) dedup.push_back(std::move(r));
  }
  return dedup;
}

ConstraintRecord IcmStore::promote(const std::string& record_id) {
  auto existing = get_by_id(record_id);
  if (!existing) {
    throw Error("unknown-provenance", "no record with id '" + record_id + "'");
  }
  if (existing->status == ConstraintStatus::Promoted) return *existing;
  ConstraintRecord promoted = *existing;
  promoted.status = ConstraintStatus::Promoted;
  put(promoted);
  return promoted;
}

// ---------------------------------------------------------------------------
// Channel 1
// ---------------------------------------------------------------------------

namespace {

std::string record_id_for(const json& body, const std::string& tag) {
  return tag + "-" + Sha256::hex_digest(body.dump()).substr(0, 12);
}

}  // namespace

std::vector<ConstraintRecord> extract_channel1(const TypedGraph& graph,
                                               const std::string& structural_rules_json) {
  json doc;
  try {
    doc = json::parse(structural_rules_json);
  } catch (const json::exception& e) {
    throw Error("declaration-invalid", std::string("rules do not parse: ") + e.what());
  }
  std::string source_id = doc.value("source_id", std::string("channel1"));
  std::vector<ConstraintRecord> out;

  // Edge cardinality bounds -> semantic shapes on the source node's name.
  for (const Relation& e : graph.edges) {
    if (!e.cardinality) continue;
    const Entity* src = graph.find_node(e.src);
    const Entity* dst = graph.find_node(e.dst);
    Shape shape;
    shape.target_kind = src->name;
    ShapeRequirement card;
    card.kind = ShapeRequirement::Cardinality;
    card.role = e.kind;
    card.min = e.cardinality->first;
    card.max = e.cardinality->second;
    shape.requirements.push_back(card);
    if (e.cardinality->first >= 1) {
      ShapeRequirement ref;
      ref.kind = ShapeRequirement::RefExists;
      ref.role = e.kind;
      ref.dst_kind = dst->name;
      shape.requirements.push_back(ref);
    }
    ConstraintRecord r;
    r.family = ConstraintFamily::Semantic;
    r.layer = ConstraintLayer::L2Sem;
    r.anchor = e.src;
    r.provenance = {SourceRef{source_id, e.id}};
    r.status = ConstraintStatus::Admitted;
    r.defines = {src->name + "." + e.kind};
    shape.id = record_id_for(shape.to_json(), "c1-sem");
    r.id = shape.id;
    shape.provenance = r.id;
    r.body = SemanticBody{std::move(shape)};
    out.push_back(std::move(r));
  }

  for (const auto& rule : doc.value("rules", json::array())) {
    std::string kind_name = rule.at("kind").get<std::string>();
    const Entity* node = graph.find_node_by_name(kind_name);
    if (node == nullptr) {
      throw Error("rule-references-unknown-kind",
                  "rule targets unknown kind '" + kind_name + "'");
    }
    // Declared numeric attribute ranges -> logical records.
    if (rule.contains("attr_ranges")) {
      for (auto it = rule.at("attr_ranges").begin(); it != rule.at("attr_ranges").end(); ++it) {
        LinearFormula f;
        f.variables = {it.key()};
        f.anchor_kind = kind_name;
        LinearConjunct lo, hi;
        lo.id = it.key() + ">=lo";
        lo.terms[it.key()] = Rational(1);
        lo.op = LinearConjunct::Ge;
        lo.rhs = rational_from_json(it.value().at(0));
        hi.id = it.key() + "<=hi";
        hi.terms[it.key()] = Rational(1);
        hi.op = LinearConjunct::Le;
        hi.rhs = rational_from_json(it.value().at(1));
        f.conjuncts = {lo, hi};
        f.defines = {it.key()};
        f.id = record_id_for(f.to_json(), "c1-log");
        f.provenance = f.id;

        ConstraintRecord r;
        r.id = f.id;
        r.family = ConstraintFamily::Logical;
        r.layer = ConstraintLayer::L2Logic;
        r.anchor = node->id;
        r.provenance = {SourceRef{source_id, kind_name + "." + it.key()}};
        r.status = ConstraintStatus::Admitted;
        r.defines = f.defines;
        r.body = LogicalBody{std::move(f)};
        out.push_back(std::move(r));
      }
    }
    // Name patterns and element grammars -> structural records.
    auto push_structural = [&](GrammarSpec spec, const std::string& locator) {
      ConstraintRecord r;
      r.family = ConstraintFamily::Structural;
      r.layer = ConstraintLayer::L1;
      r.anchor = node->id;
      r.provenance = {SourceRef{source_id, locator}};
      r.status = ConstraintStatus::Admitted;
      json body = {{"grammar_kind", grammar_kind_name(spec.kind)},
                   {"source", spec.source},
                   {"unfold_depth", spec.unfold_depth}};
      r.id = record_id_for(body, "c1-struct");
      r.body = StructuralBody{std::move(spec)};
      out.push_back(std::move(r));
    };
    if (rule.contains("name_pattern")) {
      push_structural({GrammarKind::Regex, rule.at("name_pattern").get<std::string>(), 0},
                      kind_name + ".name");
    }
    if (rule.contains("grammar")) {
      const json& gj = rule.at("grammar");
      GrammarSpec spec;
      spec.kind = grammar_kind_from_string(gj.at("kind").get<std::string>());
      spec.source = gj.at("source").get<std::string>();
      spec.unfold_depth = gj.value("unfold_depth", 8);
      push_structural(std::move(spec), kind_name + ".grammar");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel 2
// ---------------------------------------------------------------------------

ConstraintCandidate ConstraintCandidate::from_json(const json& j) {
  ConstraintCandidate c;
  c.target = j.at("target").get<std::string>();
  c.family = family_from_string(j.at("family").get<std::string>());
  if (c.family == ConstraintFamily::Structural) {
    throw Error("candidate-invalid", "candidates carry semantic or logical bodies only");
  }
  c.body = j.at("body");
  c.confidence = j.value("confidence", 0.0);
  if (c.confidence < 0.0 || c.confidence > 1.0) {
    throw Error("candidate-invalid", "confidence must be in [0, 1]");
  }
  c.doc_id = j.value("doc_id", std::string());
  c.para = j.value("para", 0);
  for (const auto& d : j.value("defines", json::array())) {
    c.defines.push_back(d.get<std::string>());
  }
  for (const auto& u : j.value("uses", json::array())) {
    c.uses.push_back(u.get<std::string>());
  }
  return c;
}

std::vector<ConstraintCandidate> ConstraintCandidate::parse_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("candidate-invalid", std::string("candidate file does not parse: ") + e.what());
  }
  if (!doc.is_array()) throw Error("candidate-invalid", "candidate file must be a JSON array");
  std::vector<ConstraintCandidate> out;
  for (const auto& j : doc) out.push_back(ConstraintCandidate::from_json(j));
  return out;
}

namespace {

// Builds the record skeleton from a candidate (body parse may throw).
ConstraintRecord record_from_candidate(const ConstraintCandidate& c,
                                       const std::string& anchor_kind_name) {
  ConstraintRecord r;
  r.family = c.family;
  r.layer = layer_of(c.family);
  r.provenance = {SourceRef{c.doc_id.empty() ? "channel2" : c.doc_id,
                            "para:" + std::to_string(c.para)}};
  r.defines = c.defines;
  r.uses = c.uses;
  if (c.family == ConstraintFamily::Semantic) {
    json body = c.body;
    if (!body.contains("target_kind")) body["target_kind"] = anchor_kind_name;
    if (!body.contains("id")) body["id"] = record_id_for(body, "c2-sem");
    try {
      Shape shape = Shape::from_json(body);
      r.id = shape.id;
      shape.provenance = r.id;
      if (r.defines.empty()) {
        for (const auto& req : shape.requirements) {
          if (!req.role.empty()) r.defines.push_back(shape.target_kind + "." + req.role);
          if (!req.attr.empty()) r.defines.push_back(shape.target_kind + "." + req.attr);
        }
      }
      r.body = SemanticBody{std::move(shape)};
    } catch (const json::exception& e) {
      throw Error("candidate-invalid", std::string("malformed shape body: ") + e.what());
    }
  } else {
    json body = c.body;
    if (!body.contains("id")) body["id"] = record_id_for(body, "c2-log");
    try {
      LinearFormula f = LinearFormula::from_json(body);
      r.id = f.id;
      f.provenance = r.id;
      if (!anchor_kind_name.empty() && f.anchor_kind.empty()) {
        f.anchor_kind = anchor_kind_name;
      }
      if (r.defines.empty()) r.defines = f.variables;
      r.body = LogicalBody{std::move(f)};
    } catch (const json::exception& e) {
      throw Error("candidate-invalid", std::string("malformed formula body: ") + e.what());
    }
  }
  return r;
}

// Channel-1 attribute ranges declared for the anchor node, as conjuncts.
std::vector<LinearConjunct> anchor_range_conjuncts(const Entity* anchor,
                                                   const std::vector<std::string>& vars) {
  std::vector<LinearConjunct> out;
  if (anchor == nullptr) return out;
  for (const std::string& var : vars) {
    auto it = anchor->attributes.find(var);
    if (it == anchor->attributes.end()) continue;
    // Value-type strings of the form "int[lo,hi]" carry declared ranges.
    const std::string& vt = it->second;
    auto lb = vt.find('[');
    auto comma = vt.find(',', lb);
    auto rb = vt.find(']', comma);
    if (lb == std::string::npos || comma == std::string::npos || rb == std::string::npos) {
      continue;
    }
    try {
      long lo = std::stol(vt.substr(lb + 1, comma - lb - 1));
      long hi = std::stol(vt.substr(comma + 1, rb - comma - 1));
      LinearConjunct clo, chi;
      clo.id = "decl:" + var + ">=";
      clo.terms[var] = Rational(1);
      clo.op = LinearConjunct::Ge;
      clo.rhs = Rational(lo);
      chi.id = "decl:" + var + "<=";
      chi.terms[var] = Rational(1);
      chi.op = LinearConjunct::Le;
      chi.rhs = Rational(hi);
      out.push_back(std::move(clo));
      out.push_back(std::move(chi));
    } catch (const std::exception&) {
      continue;
    }
  }
  return out;
}

}  // namespace

CompatibilityResult check_semantic_compatibility(const ConstraintRecord& record,
                                                 const TypedGraph& graph,
                                                 const CompatibilityBudget& budget) {
  CompatibilityResult result;
  const Entity* anchor = graph.find_node(record.anchor);

  if (const auto* lb = std::get_if<LogicalBody>(&record.body)) {
    // Exact: formula conjuncts plus any declared ranges for its variables.
    std::vector<LinearConjunct> system = lb->formula.conjuncts;
    for (auto& c : anchor_range_conjuncts(anchor, lb->formula.variables)) {
      system.push_back(std::move(c));
    }
    FmResult fm = fm_decide(system);
    if (fm.sat) {
      result.outcome = CompatibilityResult::Compatible;
      json witness;
      witness["id"] = "w0";
      witness["kind"] = anchor ? anchor->name : "element";
      for (const std::string& var : lb->formula.variables) {
        auto it = fm.model.find(var);
        Rational v = it == fm.model.end() ? Rational(0) : it->second;
        if (v.den() == 1) {
          witness[var] = v.num();
        } else {
          witness[var] = v.str();
        }
      }
      result.witness = witness.dump();
    } else {
      result.outcome = CompatibilityResult::Incompatible;
      result.reason = "formula is unsatisfiable over the declared domain";
    }
    return result;
  }

  if (const auto* sb = std::get_if<SemanticBody>(&record.body)) {
    const Shape& shape = sb->shape;
    // Bounded constructive search: one anchor element plus the elements the
    // requirements force into existence.
    json elements = json::array();
    json anchor_el;
    anchor_el["id"] = "w0";
    anchor_el["kind"] = shape.target_kind;
    int next_id = 1;
    std::vector<ArtifactReference> refs;
    for (const auto& req : shape.requirements) {
      switch (req.kind) {
        case ShapeRequirement::RefExists: {
          if (!graph.has_kind_name(req.dst_kind)) {
            result.outcome = CompatibilityResult::Incompatible;
            result.reason = "required reference kind '" + req.dst_kind +
                            "' does not exist in the model graph";
            return result;
          }
          break;
        }
        case ShapeRequirement::Cardinality: {
          if (req.min > budget.max_elements - 1) {
            result.outcome = CompatibilityResult::Unknown;
            result.reason = "witness would exceed the element budget";
            return result;
          }
          break;
        }
        case ShapeRequirement::AttrPresent:
          anchor_el[req.attr] = 0;
          break;
        case ShapeRequirement::AttrEnum: {
          if (req.allowed.empty()) {
            result.outcome = CompatibilityResult::Incompatible;
            result.reason = "empty enum for attribute '" + req.attr + "'";
            return result;
          }
          anchor_el[req.attr] = req.allowed.front();
          break;
        }
      }
    }
    // Materialize referenced elements and reference fields.
    ProjectionRules rules;
    for (const auto& req : shape.requirements) {
      if (req.kind == ShapeRequirement::RefExists) {
        std::string dst_id = "w" + std::to_string(next_id++);
        json dst;
        dst["id"] = dst_id;
        dst["kind"] = req.dst_kind;
        elements.push_back(std::move(dst));
        anchor_el[req.role] = dst_id;
        rules.reference_fields.insert(req.role);
      } else if (req.kind == ShapeRequirement::Cardinality && req.min >= 1) {
        // A single role field carries one reference; min > 1 needs more
        // reference slots than the flat projection provides.
        if (req.min > 1) {
          result.outcome = CompatibilityResult::Unknown;
          result.reason = "cardinality min > 1 exceeds the flat witness form";
          return result;
        }
        if (!anchor_el.contains(req.role)) {
          std::string dst_id = "w" + std::to_string(next_id++);
          json dst;
          dst["id"] = dst_id;
          dst["kind"] = "element";
          elements.push_back(std::move(dst));
          anchor_el[req.role] = dst_id;
          rules.reference_fields.insert(req.role);
        }
      }
      if (next_id > budget.max_elements) {
        result.outcome = CompatibilityResult::Unknown;
        result.reason = "witness would exceed the element budget";
        return result;
      }
    }
    elements.insert(elements.begin(), anchor_el);
    json artifact;
    artifact["elements"] = std::move(elements);
    std::string text = artifact.dump();

    // The witness must satisfy the candidate shape itself.
    ArtifactGraph wg = project_artifact(text, rules);
    SemTrace self_check = validate_semantic(wg, {shape});
    if (!self_check.pass()) {
      result.outcome = CompatibilityResult::Incompatible;
      result.reason = "no witness satisfies the shape: " +
                      (self_check.violations.empty()
                           ? std::string("unknown")
                           : self_check.violations.front().expected);
      return result;
    }
    result.outcome = CompatibilityResult::Compatible;
    result.witness = text;
    return result;
  }

  // Structural bodies: compatibility holds iff the grammar compiles to a
  // non-empty language.
  const auto& grammar = std::get<StructuralBody>(record.body).grammar;
  try {
    compile_grammar(grammar);
    result.outcome = CompatibilityResult::Compatible;
  } catch (const Error& e) {
    result.outcome = CompatibilityResult::Incompatible;
    result.reason = e.what();
  }
  return result;
}

ConstraintRecord admit_candidate(const ConstraintCandidate& candidate,
                                 const TypedGraph& graph, IcmStore* store,
                                 double theta_link) {
  AlignmentResult alignment = align_candidate(candidate.target, graph, theta_link);
  std::string anchor_kind_name;
  if (alignment.disposition == Disposition::Aligned) {
    anchor_kind_name = graph.find_node(*alignment.matched_node_id)->name;
  }
  ConstraintRecord record = record_from_candidate(candidate, anchor_kind_name);

  if (alignment.disposition != Disposition::Aligned) {
    record.anchor = kAbstractAnchor;
    record.status = ConstraintStatus::Quarantined;
    record.quarantine_reason = "no-anchor";
  } else {
    record.anchor = *alignment.matched_node_id;
    CompatibilityResult compat = check_semantic_compatibility(record, graph);
    if (compat.outcome == CompatibilityResult::Compatible) {
      record.status = ConstraintStatus::Admitted;
    } else {
      record.status = ConstraintStatus::Quarantined;
      record.quarantine_reason = compat.outcome == CompatibilityResult::Unknown
                                     ? "unknown: " + compat.reason
                                     : "incompatible: " + compat.reason;
    }
  }
  if (store != nullptr) store->put(record);
  return record;
}

SynthesisOutcome synthesize_dynamic(const std::vector<ConstraintCandidate>& request,
                                    const TypedGraph& graph, double theta_link) {
  SynthesisOutcome out;
  for (const ConstraintCandidate& c : request) {
    ConstraintRecord record = admit_candidate(c, graph, nullptr, theta_link);
    record.status = ConstraintStatus::Ephemeral;

    // Pairwise joint-unsat check against already-kept logical records; the
    // later candidate in request order is relaxed away.
    bool dropped = false;
    if (const auto* lb = std::get_if<LogicalBody>(&record.body)) {
      for (const ConstraintRecord& kept : out.records) {
        const auto* kb = std::get_if<LogicalBody>(&kept.body);
        if (kb == nullptr) continue;
        std::vector<LinearConjunct> joint = kb->formula.conjuncts;
        for (const auto& cj : lb->formula.conjuncts) joint.push_back(cj);
        if (!fm_decide(joint).sat) {
          out.conflict_log.push_back("relaxation: dropped '" + record.id +
                                     "' (conflicts with '" + kept.id + "')");
          dropped = true;
          break;
        }
      }
    }
    if (!dropped) out.records.push_back(std::move(record));
  }
  return out;
}

// ---------------------------------------------------------------------------
// dependency lattice
// ---------------------------------------------------------------------------

bool DependencyLattice::precedes(const std::string& a, const std::string& b) const {
  auto ra = family_rank.find(a);
  auto rb = family_rank.find(b);
  if (ra != family_rank.end() && rb != family_rank.end() && ra->second != rb->second) {
    return ra->second < rb->second;
  }
  // Path search over explicit edges.
  std::vector<std::string> stack{a};
  std::set<std::string> seen{a};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    for (const auto& [from, to] : edges) {
      if (from != cur) continue;
      if (to == b) return true;
      if (seen.insert(to).second) stack.push_back(to);
    }
  }
  return false;
}

DependencyLattice build_dependency_lattice(const std::vector<ConstraintRecord>& records) {
  DependencyLattice lattice;
  auto rank = [](ConstraintFamily f) {
    switch (f) {
      case ConstraintFamily::Structural: return 0;
      case ConstraintFamily::Semantic: return 1;
      case ConstraintFamily::Logical: return 2;
    }
    return 2;
  };
  for (const auto& r : records) {
    lattice.ids.push_back(r.id);
    lattice.family_rank[r.id] = rank(r.family);
  }
  // Intra-family symbol coupling: a precedes b when b uses a symbol a defines.
  for (const auto& a : records) {
    for (const auto& b : records) {
      if (a.id == b.id || a.family != b.family) continue;
      for (const std::string& sym : b.uses) {
        if (std::find(a.defines.begin(), a.defines.end(), sym) != a.defines.end()) {
          lattice.edges.emplace_back(a.id, b.id);
          break;
        }
      }
    }
  }
  // Cycle check (Kahn) over explicit edges.
  std::map<std::string, int> indegree;
  for (const auto& id : lattice.ids) indegree[id] = 0;
  for (const auto& [from, to] : lattice.edges) ++indegree[to];
  std::queue<std::string> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::size_t emitted = 0;
  std::map<std::string, int> remaining = indegree;
  while (!ready.empty()) {
    std::string cur = ready.front();
    ready.pop();
    ++emitted;
    for (const auto& [from, to] : lattice.edges) {
      if (from == cur && --remaining[to] == 0) ready.push(to);
    }
  }
  if (emitted != lattice.ids.size()) {
    std::string cycle;
    for (const auto& [id, deg] : remaining) {
      if (deg > 0) cycle += (cycle.empty() ? "" : ", ") + id;
    }
    throw Error("dependency-cycle", "cyclic symbol coupling among {" + cycle + "}");
  }
  return lattice;
}

}  // namespace verigen
