// verigen — compile structural constraints to prefix-closed automata, run
// masked generation with audit trails, validate, verify and repair sealed
// evidence bundles.
//
// Exit codes: 0 pass, 2 validation-failed, 3 identity/tamper, 4 usage.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "verigen/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace verigen;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitTamper = 3;
constexpr int kExitUsage = 4;

struct CommonOpts {
  std::string config_path;
  std::string format = "text";
  RunConfig config;

  void finalize() {
    // Config file overrides flags; flags override defaults.
    if (!config_path.empty()) config.apply_config_file(config_path);
  }
  bool machine() const { return format == "machine"; }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file (overrides flags)");
  cmd->add_option("--format", opts.format, "Output format: text | machine")
      ->check(CLI::IsMember({"text", "machine"}));
  cmd->add_option("--registry", opts.config.registry_dir, "Registry directory");
  cmd->add_option("--icm", opts.config.icm_dir, "ICM store directory");
  cmd->add_option("--grammar", opts.config.grammar_path, "Grammar source file");
  cmd->add_option("--kind", opts.config.grammar_kind,
                  "Grammar kind: regex | json-schema-subset | gbnf");
  cmd->add_option("-d,--unfold-depth", opts.config.unfold_depth, "GBNF unfold depth");
  cmd->add_option("--shapes", opts.config.shapes_path, "Shapes file (JSON array)");
  cmd->add_option("--formulas", opts.config.formulas_path, "Formulas file (JSON array)");
  cmd->add_option("--projection", opts.config.projection_path, "Projection rules file");
  cmd->add_option("--graph", opts.config.graph_declaration_path,
                  "Graph declaration document");
  cmd->add_option("--rules", opts.config.structural_rules_path,
                  "Channel-1 structural rules file");
  cmd->add_option("--candidates", opts.config.candidates_path,
                  "Channel-2 candidate file");
  cmd->add_option("--dynamic", opts.config.dynamic_candidates_path,
                  "Request-scoped candidate file (ephemeral)");
  cmd->add_option("--theta-link", opts.config.theta_link, "Entity-linking threshold");
  cmd->add_option("--vocabulary", opts.config.vocabulary_path, "Vocabulary file");
}

int exit_for_error(const Error& e) {
  const std::string& c = e.code();
  if (c == "identity-mismatch" || c == "replay-divergence" || c == "seal-mismatch") {
    return kExitTamper;
  }
  return kExitUsage;
}

int cmd_compile(const CommonOpts& opts) {
  GrammarSpec spec;
  spec.kind = grammar_kind_from_string(opts.config.grammar_kind);
  spec.source = read_file(opts.config.grammar_path);
  spec.unfold_depth = opts.config.unfold_depth;
  PrefixDfa dfa = compile_grammar(spec);
  if (opts.machine()) {
    json j;
    j["states"] = dfa.state_count();
    j["start_completion_len"] = dfa.completion_len(dfa.start());
    j["automaton_id"] = dfa.automaton_id();
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "states: " << dfa.state_count() << "\n"
              << "L(start): " << dfa.completion_len(dfa.start()) << "\n"
              << "automaton_id: " << dfa.automaton_id() << "\n";
  }
  return kExitOk;
}

int cmd_generate(CommonOpts& opts, bool repair_after, int max_iterations) {
  GenerateRun run = run_generate(opts.config);
  json j;
  j["artifact_address"] = run.artifact_address;
  j["bundle_address"] = run.bundle_address;
  j["verdict"] = run.verdict;
  j["version"] = run.bundle.version;
  if (!opts.config.output_path.empty()) j["artifact_path"] = opts.config.output_path;

  if (!run.verdict && repair_after) {
    std::string artifact_path = opts.config.output_path;
    if (artifact_path.empty()) {
      artifact_path = opts.config.registry_dir + "/last-artifact";
      write_file(artifact_path, run.artifact);
    }
    RepairRun rr = run_repair(opts.config, artifact_path, run.bundle_address,
                              opts.config.registry_dir + "/tickets", max_iterations);
    j["repair_status"] =
        rr.outcome.status == RepairOutcome::Repaired ? "repaired" : "manual_review";
    j["repair_iterations"] = rr.outcome.iterations;
    j["repaired_version"] = rr.outcome.bundle.version;
    if (rr.outcome.status == RepairOutcome::Repaired) {
      if (!opts.config.output_path.empty()) {
        write_file(opts.config.output_path, rr.outcome.artifact);
      }
      std::cout << (opts.machine() ? j.dump() : "repaired: " + rr.outcome.bundle.version)
                << "\n";
      return kExitOk;
    }
  }

  if (opts.machine()) {
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "artifact: " << run.artifact_address << "\n"
              << "bundle:   " << run.bundle_address << "\n"
              << "verdict:  " << (run.verdict ? "pass" : "fail") << "\n";
  }
  return run.verdict ? kExitOk : kExitValidation;
}

int cmd_validate(const CommonOpts& opts, const std::string& artifact_path) {
  AssembledSuite assembled = assemble_suite(opts.config);
  std::string artifact = read_file(artifact_path);
  ArtifactGraph graph = project_artifact(artifact, assembled.suite.projection);
  SemTrace sem = validate_semantic(graph, assembled.suite.shapes);
  LogicTrace logic = run_logic_validators(graph, assembled.suite.formulas);
  bool pass = sem.pass() && logic.pass();
  if (opts.machine()) {
    json j;
    j["sem_pass"] = sem.pass();
    j["logic_pass"] = logic.pass();
    json vs = json::array();
    for (const auto& v : sem.violations) {
      vs.push_back({{"path", v.path}, {"expected", v.expected}});
    }
    j["violations"] = vs;
    std::cout << j.dump() << "\n";
  } else {
    for (const auto& v : sem.violations) {
      std::cout << "violation: " << v.path << " — " << v.expected << "\n";
    }
    for (const auto& c : logic.certs) {
      if (!c.sat) {
        std::cout << "unsat: " << c.formula_id
                  << (c.element_id.empty() ? "" : " @ " + c.element_id) << " core={";
        for (std::size_t i = 0; i < c.core.size(); ++i) {
          std::cout << (i ? ", " : "") << c.core[i];
        }
        std::cout << "}\n";
      }
    }
    std::cout << (pass ? "pass" : "fail") << "\n";
  }
  return pass ? kExitOk : kExitValidation;
}

int cmd_verify(const CommonOpts& opts, const std::string& artifact_path,
               const std::string& bundle_address) {
  VerifyOutcome out = run_verify(opts.config, artifact_path, bundle_address);
  if (opts.machine()) {
    json j;
    j["verdict"] = out.verdict;
    j["failure"] = out.failure;
    j["detail"] = out.detail;
    std::cout << j.dump() << "\n";
  } else if (out.verdict) {
    std::cout << "verified\n";
  } else {
    std::cout << "failed: " << out.failure << " — " << out.detail << "\n";
  }
  if (out.verdict) return kExitOk;
  if (out.failure == "validation-failed") return kExitValidation;
  return kExitTamper;
}

int cmd_repair(const CommonOpts& opts, const std::string& artifact_path,
               const std::string& bundle_address, const std::string& tickets_dir,
               int max_iterations) {
  RepairRun rr = run_repair(opts.config, artifact_path, bundle_address, tickets_dir,
                            max_iterations);
  if (opts.machine()) {
    json j;
    j["status"] =
        rr.outcome.status == RepairOutcome::Repaired ? "repaired" : "manual_review";
    j["iterations"] = rr.outcome.iterations;
    j["version"] = rr.outcome.bundle.version;
    j["tickets"] = rr.ticket_paths;
    std::cout << j.dump() << "\n";
  } else if (rr.outcome.status == RepairOutcome::Repaired) {
    std::cout << "repaired in " << rr.outcome.iterations << " iteration(s), bundle "
              << rr.outcome.bundle.version << "\n";
  } else {
    std::cout << "manual review: " << rr.outcome.residuals.size() << " residual(s)";
    if (!rr.ticket_paths.empty()) std::cout << ", tickets in " << tickets_dir;
    std::cout << "\n";
  }
  return rr.outcome.status == RepairOutcome::Repaired ? kExitOk : kExitValidation;
}

int cmd_registry(const CommonOpts& opts, const std::string& action,
                 const std::string& address) {
  Registry registry(opts.config.registry_dir);
  if (action == "ls") {
    if (opts.machine()) {
      json j;
      j["addresses"] = registry.list_addresses();
      json m = json::array();
      for (const auto& e : registry.manifest()) {
        m.push_back({{"artifact", e.artifact_address},
                     {"bundle", e.bundle_address},
                     {"version", e.version_tag}});
      }
      j["manifest"] = m;
      std::cout << j.dump() << "\n";
    } else {
      for (const auto& a : registry.list_addresses()) std::cout << a << "\n";
      for (const auto& e : registry.manifest()) {
        std::cout << "manifest: " << e.artifact_address.substr(0, 12) << " -> "
                  << e.bundle_address.substr(0, 12) << " [" << e.version_tag << "]\n";
      }
    }
    return kExitOk;
  }
  // show
  auto bytes = registry.fetch(address);
  if (!bytes) {
    std::cerr << "not found: " << address << "\n";
    return kExitUsage;
  }
  std::cout << *bytes << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained generation with proof-carrying evidence"};
  app.require_subcommand(1);

  CommonOpts compile_opts, generate_opts, validate_opts, verify_opts, repair_opts,
      registry_opts;

  auto* compile = app.add_subcommand("compile", "Compile a grammar to a prefix DFA");
  add_common(compile, compile_opts);

  auto* generate = app.add_subcommand("generate", "Masked decode + validate + seal");
  add_common(generate, generate_opts);
  bool repair_flag = false;
  int gen_max_iter = 4;
  generate->add_option("--seed", generate_opts.config.seed, "Decode seed");
  generate->add_option("--proposer", generate_opts.config.proposer,
                       "uniform | ngram | adversarial");
  generate->add_option("--max-steps", generate_opts.config.policy.max_steps,
                       "Decode step budget");
  generate->add_option("-o,--output", generate_opts.config.output_path,
                       "Artifact output path");
  generate->add_flag("--repair", repair_flag, "Run the repair loop on failure");
  generate->add_option("--max-iterations", gen_max_iter, "Repair iteration budget");

  auto* validate = app.add_subcommand("validate", "Run L2 validators on an artifact");
  add_common(validate, validate_opts);
  std::string validate_artifact;
  validate->add_option("artifact", validate_artifact, "Artifact path")->required();

  auto* verify = app.add_subcommand("verify", "Independently re-check a sealed bundle");
  add_common(verify, verify_opts);
  std::string verify_artifact, verify_bundle_addr;
  verify->add_option("artifact", verify_artifact, "Artifact path")->required();
  verify->add_option("bundle", verify_bundle_addr, "Bundle address or file")->required();

  auto* repair = app.add_subcommand("repair", "Audit-guided repair loop");
  add_common(repair, repair_opts);
  std::string repair_artifact, repair_bundle_addr, tickets_dir = "tickets";
  int max_iter = 4;
  repair->add_option("artifact", repair_artifact, "Artifact path")->required();
  repair->add_option("bundle", repair_bundle_addr, "Bundle address or file")->required();
  repair->add_option("--tickets", tickets_dir, "Manual-review ticket directory");
  repair->add_option("--max-iterations", max_iter, "Iteration budget");
  repair->add_option("-o,--output", repair_opts.config.output_path,
                     "Repaired artifact output path");

  auto* registry = app.add_subcommand("registry", "Inspect the evidence registry");
  add_common(registry, registry_opts);
  std::string reg_action, reg_address;
  registry->add_option("action", reg_action, "ls | show")->required();
  registry->add_option("address", reg_address, "Entry address (for show)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (compile->parsed()) {
      compile_opts.finalize();
      return cmd_compile(compile_opts);
    }
    if (generate->parsed()) {
      generate_opts.finalize();
      return cmd_generate(generate_opts, repair_flag, gen_max_iter);
    }
    if (validate->parsed()) {
      validate_opts.finalize();
      return cmd_validate(validate_opts, validate_artifact);
    }
    if (verify->parsed()) {
      verify_opts.finalize();
      return cmd_verify(verify_opts, verify_artifact, verify_bundle_addr);
    }
    if (repair->parsed()) {
      repair_opts.finalize();
      return cmd_repair(repair_opts, repair_artifact, repair_bundle_addr, tickets_dir,
                        max_iter);
    }
    if (registry->parsed()) {
      registry_opts.finalize();
      if (reg_action != "ls" && reg_action != "show") {
        std::cerr << "unknown registry action '" << reg_action << "'\n";
        return kExitUsage;
      }
      if (reg_action == "show" && reg_address.empty()) {
        std::cerr << "registry show needs an address\n";
        return kExitUsage;
      }
      return cmd_registry(registry_opts, reg_action, reg_address);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
