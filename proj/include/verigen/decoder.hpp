#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "verigen/automaton.hpp"
#include "verigen/traces.hpp"
#include "verigen/vocabulary.hpp"

namespace verigen {

// A proposer is a pure function from (emitted bytes, step index) to
// per-token nonnegative weights (size = vocabulary size). This is the
// pluggable seam in place of any model runtime.
using Proposer = std::function<std::vector<double>(std::string_view emitted, int step)>;

Proposer make_uniform_proposer(int vocab_size);
// Fixed-table n-gram style mock: weights depend deterministically on the
// trailing bytes of the emitted prefix and the seed.
Proposer make_ngram_proposer(int vocab_size, std::uint64_t seed, int context_bytes = 3);
// Piles weight on a seeded subset of tokens regardless of validity;
// exercises masking and the zero-mass fallback.
Proposer make_adversarial_proposer(int vocab_size, std::uint64_t seed);

struct DecodePolicy {
  int max_steps = 256;
  std::string weight_transform = "identity";  // identity | sharpen | flatten | greedy
  std::map<std::string, std::uint64_t> min_coverage;  // symbol tag -> min count
  AuditMode audit_mode = AuditMode::Summary;
  std::uint64_t debug_set_threshold = 1000;
};

class DecodeSession;

// Token-granular mask: ids whose byte-fold from `state` stays on retained
// states. EOS is included iff the state is accepting and `coverage_ok`.
std::vector<int> allowed_tokens(const PrefixDfa& dfa, int state,
                                const Vocabulary& vocab, bool coverage_ok = true);

// true iff every configured (symbol tag, min count) is satisfied.
bool coverage_gate(const DecodeSession& session, const DecodePolicy& policy);

struct CloseResult {
  std::string artifact;
  StructTrace struct_trace;
  AuditTrail trail;
};

class DecodeSession {
public:
  DecodeSession(const PrefixDfa& dfa, const Vocabulary& vocab,
                DecodePolicy policy, std::uint64_t seed);

  const PrefixDfa& dfa() const { return *dfa_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const DecodePolicy& policy() const { return policy_; }
  int state() const { return state_; }
  const std::string& emitted() const { return emitted_; }
  int step_count() const { return step_count_; }
  bool finished() const { return finished_; }
  const AuditTrail& trail() const { return trail_; }
  const std::map<std::string, std::uint64_t>& coverage_counters() const {
    return coverage_;
  }

  // Current mask, gate applied. Cached per state; the gate decision is
  // evaluated fresh each call.
  const std::vector<int>& mask_token_ids();
  std::vector<int> current_mask();

  // Samples from `weights` restricted to the current mask, advances the
  // automaton, appends the audit tuple. Throws "dead-end" on an empty mask
  // (callers check first; see generate()).
  int step(const std::vector<double>& weights);

  // EOS closure: appends T*(state) when not accepting (at most one
  // structural edit) and finalizes the struct trace.
  CloseResult close();

  void flag_max_steps_exhausted() { max_steps_exhausted_ = true; }

private:
  struct MaskEntry {
    std::vector<int> token_ids;   // byte tokens only (no EOS)
    std::vector<int> dest_state;
  };
  const MaskEntry& mask_for(int state);
  void fold_coverage(int from_state, int token_id);
  double transform_weight(double w) const;

  const PrefixDfa* dfa_;
  const Vocabulary* vocab_;
  DecodePolicy policy_;
  int state_;
  std::string emitted_;
  int step_count_ = 0;
  bool finished_ = false;
  bool max_steps_exhausted_ = false;
  bool last_gate_ = false;
  bool gate_seen_ = false;
  std::vector<int> run_;  // byte-level state sequence
  AuditTrail trail_;
  std::map<std::string, std::uint64_t> coverage_;
  std::mt19937_64 rng_;
  std::unordered_map<int, MaskEntry> mask_cache_;
  std::vector<int> scratch_mask_;
  TraceTimes struct_time_;
};

struct GenerateResult {
  std::string artifact;
  StructTrace struct_trace;
  AuditTrail trail;
  bool eos_accepted = false;
};

// Full masked decode loop: step() until EOS or max-steps, then close().
GenerateResult generate(const Proposer& proposer, const PrefixDfa& dfa,
                        const Vocabulary& vocab, const DecodePolicy& policy,
                        std::uint64_t seed);

// Single accepting state with self-loops on every byte; the unconstrained
// baseline (every token sequence is admissible).
PrefixDfa all_allow_dfa();

}  // namespace verigen
