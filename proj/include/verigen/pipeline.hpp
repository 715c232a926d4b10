#pragma once

#include <optional>
#include <string>
#include <vector>

#include "verigen/constraint_model.hpp"
#include "verigen/decoder.hpp"
#include "verigen/evidence.hpp"
#include "verigen/registry.hpp"
#include "verigen/repair.hpp"

namespace verigen {

// End-to-end run configuration. Precedence: defaults < flags < config file
// (the file wins, for CI reproducibility).
struct RunConfig {
  std::string grammar_path;
  std::string grammar_kind = "regex";
  int unfold_depth = 8;
  std::string vocabulary_path;
  std::string graph_declaration_path;
  std::string structural_rules_path;
  std::string candidates_path;
  std::string dynamic_candidates_path;
  std::string shapes_path;
  std::string formulas_path;
  std::string projection_path;
  std::string registry_dir = "registry";
  std::string icm_dir;
  std::string output_path;
  std::uint64_t seed = 42;
  double theta_link = kDefaultThetaLink;
  std::string proposer = "uniform";  // uniform | ngram | adversarial
  DecodePolicy policy;

  // Applies the JSON config document on top of this object.
  void apply_config_file(const std::string& path);
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

// Everything the validators need, assembled from files plus the ICM store
// (admitted/promoted records first) plus ephemeral synthesis.
struct AssembledSuite {
  ValidationSuite suite;
  std::vector<std::string> conflict_log;  // from dynamic synthesis
};

AssembledSuite assemble_suite(const RunConfig& config);

struct GenerateRun {
  std::string artifact;
  EvidenceBundle bundle;
  std::string artifact_address;
  std::string bundle_address;
  bool verdict = false;
};

// compile grammar -> decode under masking -> project -> validate -> compose
// -> enrich -> seal -> registry append + manifest.
GenerateRun run_generate(const RunConfig& config);

// Re-check an (artifact, bundle) pair from sources alone.
VerifyOutcome run_verify(const RunConfig& config, const std::string& artifact_path,
                         const std::string& bundle_address);

struct RepairRun {
  RepairOutcome outcome;
  std::vector<std::string> ticket_paths;
};

RepairRun run_repair(const RunConfig& config, const std::string& artifact_path,
                     const std::string& bundle_address,
                     const std::string& tickets_dir, int max_iterations);

}  // namespace verigen
