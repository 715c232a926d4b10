#include "verigen/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace verigen {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << bytes;
}

void RunConfig::apply_config_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("config-invalid", std::string("config does not parse: ") + e.what());
  }
  auto str = [&](const char* key, std::string& into) {
    if (doc.contains(key)) into = doc.at(key).get<std::string>();
  };
  str("grammar", grammar_path);
  str("grammar_kind", grammar_kind);
  str("vocabulary", vocabulary_path);
  str("graph_declaration", graph_declaration_path);
  str("structural_rules", structural_rules_path);
  str("candidates", candidates_path);
  str("dynamic_candidates", dynamic_candidates_path);
  str("shapes", shapes_path);
  str("formulas", formulas_path);
  str("projection", projection_path);
  str("registry_dir", registry_dir);
  str("icm_dir", icm_dir);
  str("output", output_path);
  str("proposer", proposer);
  if (doc.contains("unfold_depth")) unfold_depth = doc.at("unfold_depth").get<int>();
  if (doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("theta_link")) theta_link = doc.at("theta_link").get<double>();
  if (doc.contains("policy")) {
    const json& p = doc.at("policy");
    if (p.contains("max_steps")) policy.max_steps = p.at("max_steps").get<int>();
    if (p.contains("weight_transform")) {
      policy.weight_transform = p.at("weight_transform").get<std::string>();
    }
    if (p.contains("audit_mode")) {
      policy.audit_mode = audit_mode_from_string(p.at("audit_mode").get<std::string>());
    }
    if (p.contains("debug_set_threshold")) {
      policy.debug_set_threshold = p.at("debug_set_threshold").get<std::uint64_t>();
    }
    if (p.contains("min_coverage")) {
      for (auto it = p.at("min_coverage").begin(); it != p.at("min_coverage").end(); ++it) {
        policy.min_coverage[it.key()] = it.value().get<std::uint64_t>();
      }
    }
  }
}

AssembledSuite assemble_suite(const RunConfig& config) {
  AssembledSuite out;
  if (!config.projection_path.empty()) {
    out.suite.projection =
        ProjectionRules::from_json(json::parse(read_file(config.projection_path)));
  }
  if (!config.shapes_path.empty()) {
    json doc = json::parse(read_file(config.shapes_path));
    int i = 0;
    for (const auto& sj : doc) {
      Shape s = Shape::from_json(sj);
      if (s.provenance.empty()) {
        s.provenance = "file:" + config.shapes_path + "#" + std::to_string(i);
      }
      out.suite.shapes.push_back(std::move(s));
      ++i;
    }
  }
  if (!config.formulas_path.empty()) {
    json doc = json::parse(read_file(config.formulas_path));
    int i = 0;
    for (const auto& fj : doc) {
      LinearFormula f = LinearFormula::from_json(fj);
      if (f.provenance.empty()) {
        f.provenance = "file:" + config.formulas_path + "#" + std::to_string(i);
      }
      out.suite.formulas.push_back(std::move(f));
      ++i;
    }
  }

  // Model graph + channels.
  std::optional<TypedGraph> graph;
  if (!config.graph_declaration_path.empty()) {
    graph = build_typed_graph(read_file(config.graph_declaration_path));
  }
  std::optional<IcmStore> store;
  if (!config.icm_dir.empty()) store.emplace(config.icm_dir);

  if (graph && !config.structural_rules_path.empty()) {
    std::vector<ConstraintRecord> records =
        extract_channel1(*graph, read_file(config.structural_rules_path));
    for (ConstraintRecord& r : records) {
      if (store) store->put(r);
    }
  }
  if (graph && !config.candidates_path.empty()) {
    auto candidates =
        ConstraintCandidate::parse_file(read_file(config.candidates_path));
    for (const auto& c : candidates) {
      admit_candidate(c, *graph, store ? &*store : nullptr, config.theta_link);
    }
  }

  // Active records: promoted first, then admitted; quarantined never flow.
  if (store) {
    for (const ConstraintRecord& r : store->list()) {
      if (r.status != ConstraintStatus::Admitted &&
          r.status != ConstraintStatus::Promoted) {
        continue;
      }
      if (const auto* sb = std::get_if<SemanticBody>(&r.body)) {
        out.suite.shapes.push_back(sb->shape);
      } else if (const auto* lb = std::get_if<LogicalBody>(&r.body)) {
        out.suite.formulas.push_back(lb->formula);
      }
    }
  }

  // Ephemeral request-scoped constraints flow to validators only.
  if (graph && !config.dynamic_candidates_path.empty()) {
    auto request =
        ConstraintCandidate::parse_file(read_file(config.dynamic_candidates_path));
    SynthesisOutcome synth = synthesize_dynamic(request, *graph, config.theta_link);
    out.conflict_log = synth.conflict_log;
    for (const ConstraintRecord& r : synth.records) {
      if (const auto* sb = std::get_if<SemanticBody>(&r.body)) {
        out.suite.shapes.push_back(sb->shape);
      } else if (const auto* lb = std::get_if<LogicalBody>(&r.body)) {
        out.suite.formulas.push_back(lb->formula);
      }
    }
  }
  return out;
}

namespace {

GrammarSpec grammar_spec_of(const RunConfig& config) {
  GrammarSpec spec;
  spec.kind = grammar_kind_from_string(config.grammar_kind);
  spec.source = read_file(config.grammar_path);
  spec.unfold_depth = config.unfold_depth;
  return spec;
}

Proposer proposer_of(const RunConfig& config, int vocab_size) {
  if (config.proposer == "uniform") return make_uniform_proposer(vocab_size);
  if (config.proposer == "ngram") return make_ngram_proposer(vocab_size, config.seed);
  if (config.proposer == "adversarial") {
    return make_adversarial_proposer(vocab_size, config.seed);
  }
  throw Error("config-invalid", "unknown proposer '" + config.proposer + "'");
}

}  // namespace

GenerateRun run_generate(const RunConfig& config) {
  PrefixDfa dfa = compile_grammar(grammar_spec_of(config));
  Vocabulary vocab = Vocabulary::load(config.vocabulary_path);
  AssembledSuite assembled = assemble_suite(config);

  GenerateResult gen = generate(proposer_of(config, vocab.size()), dfa, vocab,
                                config.policy, config.seed);

  ArtifactGraph graph;
  try {
    graph = project_artifact(gen.artifact, assembled.suite.projection);
  } catch (const Error&) {
    if (!assembled.suite.shapes.empty() || !assembled.suite.formulas.empty()) throw;
    // Non-JSON artifact with nothing to validate at L2.
  }
  SemTrace sem = validate_semantic(graph, assembled.suite.shapes);
  LogicTrace logic = run_logic_validators(graph, assembled.suite.formulas);

  EvidenceBundle bundle =
      compose_bundle(gen.struct_trace, std::move(sem), std::move(logic), gen.artifact);
  bundle = enrich(std::move(bundle), gen.trail);
  bundle = seal_bundle(std::move(bundle), gen.artifact, next_logical_time());

  Registry registry(config.registry_dir);
  GenerateRun out;
  out.artifact = gen.artifact;
  out.artifact_address = registry.append(gen.artifact);
  out.bundle_address = registry.append(bundle.canonical());
  registry.append(gen.trail.to_jsonl());
  registry.manifest_append({out.artifact_address, out.bundle_address, bundle.version});
  out.verdict = bundle.verdict();
  out.bundle = std::move(bundle);
  if (!config.output_path.empty()) write_file(config.output_path, out.artifact);
  return out;
}

VerifyOutcome run_verify(const RunConfig& config, const std::string& artifact_path,
                         const std::string& bundle_address) {
  std::string artifact = read_file(artifact_path);
  Registry registry(config.registry_dir);
  std::optional<std::string> bundle_bytes = registry.fetch(bundle_address);
  std::string raw;
  if (bundle_bytes) {
    raw = *bundle_bytes;
  } else if (fs::exists(bundle_address)) {
    raw = read_file(bundle_address);  // also accept a bundle file path
  } else {
    throw Error("io", "bundle address not found: " + bundle_address);
  }
  EvidenceBundle bundle;
  try {
    bundle = EvidenceBundle::from_json(json::parse(raw));
  } catch (const json::exception& e) {
    VerifyOutcome out;
    out.failure = "replay-divergence";
    out.detail = std::string("bundle does not parse: ") + e.what();
    return out;
  }
  PrefixDfa dfa = compile_grammar(grammar_spec_of(config));
  AssembledSuite assembled = assemble_suite(config);
  return verify_bundle(bundle, artifact, dfa, assembled.suite.projection,
                       assembled.suite.shapes, assembled.suite.formulas);
}

RepairRun run_repair(const RunConfig& config, const std::string& artifact_path,
                     const std::string& bundle_address,
                     const std::string& tickets_dir, int max_iterations) {
  std::string artifact = read_file(artifact_path);
  Registry registry(config.registry_dir);
  std::optional<std::string> bundle_bytes = registry.fetch(bundle_address);
  std::string raw = bundle_bytes ? *bundle_bytes : read_file(bundle_address);
  EvidenceBundle bundle = EvidenceBundle::from_json(json::parse(raw));

  PrefixDfa dfa = compile_grammar(grammar_spec_of(config));
  AssembledSuite assembled = assemble_suite(config);

  std::optional<IcmStore> store;
  if (!config.icm_dir.empty()) store.emplace(config.icm_dir);

  // Lattice over the active ICM records (file constraints keep the default
  // stratification).
  std::vector<ConstraintRecord> records;
  if (store) {
    for (const ConstraintRecord& r : store->list()) {
      if (r.status == ConstraintStatus::Admitted ||
          r.status == ConstraintStatus::Promoted) {
        records.push_back(r);
      }
    }
  }
  DependencyLattice lattice = build_dependency_lattice(records);

  auto patcher = make_builtin_patcher();
  RepairContext ctx;
  ctx.dfa = &dfa;
  ctx.suite = assembled.suite;
  ctx.lattice = std::move(lattice);
  ctx.patcher = patcher.get();
  ctx.icm = store ? &*store : nullptr;
  ctx.registry = &registry;

  RepairRun out;
  out.outcome = run_repair_loop(ctx, artifact, bundle, max_iterations);

  if (out.outcome.status == RepairOutcome::ManualReview && !tickets_dir.empty()) {
    fs::create_directories(tickets_dir);
    ArtifactGraph graph = project_artifact(out.outcome.artifact, assembled.suite.projection);
    int i = 0;
    for (const Violation& v : out.outcome.residuals) {
      json ticket = manual_review_ticket(v, graph);
      std::string path =
          (fs::path(tickets_dir) / ("ticket-" + std::to_string(i++) + ".json")).string();
      write_file(path, ticket.dump(2));
      out.ticket_paths.push_back(path);
    }
  }
  if (!config.output_path.empty() && out.outcome.status == RepairOutcome::Repaired) {
    write_file(config.output_path, out.outcome.artifact);
  }
  return out;
}

}  // namespace verigen
