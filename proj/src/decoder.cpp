#include "verigen/decoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "verigen/grammar.hpp"

namespace verigen {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string audit_mode_name(AuditMode m) {
  switch (m) {
    case AuditMode::Summary: return "summary";
    case AuditMode::Full: return "full";
    case AuditMode::KeyEvent: return "key-event";
  }
  return "?";
}

AuditMode audit_mode_from_string(const std::string& s) {
  if (s == "summary") return AuditMode::Summary;
  if (s == "full") return AuditMode::Full;
  if (s == "key-event") return AuditMode::KeyEvent;
  throw Error("unsupported-keyword", "unknown audit mode '" + s + "'");
}

Proposer make_uniform_proposer(int vocab_size) {
  return [vocab_size](std::string_view, int) {
    return std::vector<double>(std::size_t(vocab_size), 1.0);
  };
}

Proposer make_ngram_proposer(int vocab_size, std::uint64_t seed,
                             int context_bytes) {
  return [vocab_size, seed, context_bytes](std::string_view emitted, int) {
    std::uint64_t ctx = seed;
    std::size_t n = emitted.size();
    std::size_t from = n > std::size_t(context_bytes) ? n - std::size_t(context_bytes) : 0;
    for (std::size_t i = from; i < n; ++i) {
      ctx = splitmix64(ctx ^ (std::uint64_t(static_cast<unsigned char>(emitted[i])) << 8));
    }
    std::vector<double> w(static_cast<std::size_t>(vocab_size));
    for (int t = 0; t < vocab_size; ++t) {
      std::uint64_t h = splitmix64(ctx ^ std::uint64_t(t));
      w[std::size_t(t)] = double(h >> 11) / double(1ULL << 53);
    }
    return w;
  };
}

Proposer make_adversarial_proposer(int vocab_size, std::uint64_t seed) {
  return [vocab_size, seed](std::string_view emitted, int step) {
    std::vector<double> w(std::size_t(vocab_size), 0.0);
    std::uint64_t h = splitmix64(seed ^ std::uint64_t(step) ^
                                 std::uint64_t(emitted.size()) << 32);
    // All mass on a few favourites; everything else exactly zero so the
    // uniform fallback path gets exercised whenever they are masked.
    for (int k = 0; k < 3; ++k) {
      h = splitmix64(h);
      w[std::size_t(h % std::uint64_t(vocab_size))] = 1e6;
    }
    return w;
  };
}

std::vector<int> allowed_tokens(const PrefixDfa& dfa, int state,
                                const Vocabulary& vocab, bool coverage_ok) {
  std::vector<int> out;
  for (int t = 0; t < vocab.size(); ++t) {
    if (vocab.is_eos(t)) {
      if (dfa.accepting(state) && coverage_ok) out.push_back(t);
      continue;
    }
    if (dfa.fold(state, vocab.bytes(t)) != PrefixDfa::kDead) out.push_back(t);
  }
  return out;
}

DecodeSession::DecodeSession(const PrefixDfa& dfa, const Vocabulary& vocab,
                             DecodePolicy policy, std::uint64_t seed)
    : dfa_(&dfa),
      vocab_(&vocab),
      policy_(std::move(policy)),
      state_(dfa.start()),
      rng_(seed) {
  if (policy_.max_steps < 1) throw Error("policy-invalid", "max_steps must be >= 1");
  run_.push_back(state_);
  trail_.mode = policy_.audit_mode;
  trail_.automaton_id = dfa.automaton_id();
  struct_time_ = TraceTimes::open();
  const std::string& tag = dfa_->symbol_tag(state_);
  if (!tag.empty()) ++coverage_[tag];
}

const DecodeSession::MaskEntry& DecodeSession::mask_for(int state) {
  auto it = mask_cache_.find(state);
  if (it != mask_cache_.end()) return it->second;
  MaskEntry entry;
  for (int t = 0; t < vocab_->size(); ++t) {
    if (vocab_->is_eos(t)) continue;
    std::int32_t dest = dfa_->fold(state, vocab_->bytes(t));
    if (dest != PrefixDfa::kDead) {
      entry.token_ids.push_back(t);
      entry.dest_state.push_back(dest);
    }
  }
  return mask_cache_.emplace(state, std::move(entry)).first->second;
}

bool coverage_gate(const DecodeSession& session, const DecodePolicy& policy) {
  for (const auto& [tag, min_count] : policy.min_coverage) {
    auto it = session.coverage_counters().find(tag);
    std::uint64_t have = it == session.coverage_counters().end() ? 0 : it->second;
    if (have < min_count) return false;
  }
  return true;
}

const std::vector<int>& DecodeSession::mask_token_ids() {
  const MaskEntry& entry = mask_for(state_);
  bool gate = coverage_gate(*this, policy_);
  if (gate_seen_ && gate != last_gate_ &&
      policy_.audit_mode == AuditMode::KeyEvent) {
    trail_.events.push_back(
        {AuditEvent::CoverageGateFlip, step_count_, gate ? "open" : "closed"});
  }
  gate_seen_ = true;
  last_gate_ = gate;
  scratch_mask_ = entry.token_ids;
  if (dfa_->accepting(state_) && gate) {
    scratch_mask_.push_back(vocab_->eos_index());
  }
  return scratch_mask_;
}

std::vector<int> DecodeSession::current_mask() { return mask_token_ids(); }

double DecodeSession::transform_weight(double w) const {
  if (policy_.weight_transform == "sharpen") return w * w;
  if (policy_.weight_transform == "flatten") return std::sqrt(w);
  return w;
}

void DecodeSession::fold_coverage(int from_state, int token_id) {
  std::int32_t q = from_state;
  for (unsigned char c : vocab_->bytes(token_id)) {
    q = dfa_->next(q, c);
    run_.push_back(q);
    const std::string& tag = dfa_->symbol_tag(q);
    if (!tag.empty()) ++coverage_[tag];
  }
}

int DecodeSession::step(const std::vector<double>& weights) {
  if (finished_) throw Error("dead-end", "session already finished");
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<int>& mask = mask_token_ids();
  if (mask.empty()) {
    throw Error("dead-end", "empty allowed-token set");
  }
  if (weights.size() != std::size_t(vocab_->size())) {
    throw Error("policy-invalid", "weight vector size mismatch");
  }

  int chosen;
  if (policy_.weight_transform == "greedy") {
    chosen = mask[0];
    double best = -1.0;
    for (int id : mask) {
      double w = weights[std::size_t(id)];
      if (w > best) {
        best = w;
        chosen = id;
      }
    }
  } else {
    double total = 0.0;
    for (int id : mask) {
      double w = weights[std::size_t(id)];
      if (w < 0.0) throw Error("policy-invalid", "negative proposer weight");
      total += transform_weight(w);
    }
    if (total <= 0.0) {
      // Zero mass on the mask: uniform fallback.
      std::uint64_t pick = rng_() % mask.size();
      chosen = mask[std::size_t(pick)];
    } else {
      double r = (double(rng_() >> 11) / double(1ULL << 53)) * total;
      double acc = 0.0;
      chosen = mask.back();
      for (int id : mask) {
        acc += transform_weight(weights[std::size_t(id)]);
        if (r < acc) {
          chosen = id;
          break;
        }
      }
    }
  }

  int state_before = state_;
  std::uint64_t allowed_count = mask.size();
  bool is_eos = vocab_->is_eos(chosen);
  if (is_eos) {
    finished_ = true;
    if (policy_.audit_mode == AuditMode::KeyEvent) {
      trail_.events.push_back({AuditEvent::Eos, step_count_, ""});
    }
  } else {
    fold_coverage(state_, chosen);
    state_ = int(run_.back());
    emitted_ += vocab_->bytes(chosen);
  }
  ++step_count_;

  auto t1 = std::chrono::steady_clock::now();
  AuditTuple tuple;
  tuple.step = step_count_;
  tuple.state_before = state_before;
  tuple.allowed_count = allowed_count;
  tuple.token_id = chosen;
  tuple.state_after = state_;
  tuple.latency_ns = std::uint64_t(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  if (policy_.audit_mode == AuditMode::Full &&
      allowed_count < policy_.debug_set_threshold) {
    tuple.full_allowed_set = mask;
  }
  if (policy_.audit_mode != AuditMode::KeyEvent) {
    trail_.tuples.push_back(std::move(tuple));
  }
  return chosen;
}

CloseResult DecodeSession::close() {
  CloseResult out;
  StructTrace& st = out.struct_trace;
  if (!dfa_->accepting(state_)) {
    const std::string& suffix = dfa_->completion(state_);
    std::int32_t q = state_;
    for (unsigned char c : suffix) {
      q = dfa_->next(q, c);
      run_.push_back(q);
    }
    state_ = q;
    emitted_ += suffix;
    st.closure_events = 1;
    st.closure_suffix = suffix;
    trail_.events.push_back({AuditEvent::Closure, step_count_, escape_bytes(suffix)});
  }
  finished_ = true;
  st.run = run_;
  st.accepted = dfa_->accepting(state_);
  st.automaton_id = dfa_->automaton_id();
  st.max_steps_exhausted = max_steps_exhausted_;
  struct_time_.close();
  st.time = struct_time_;
  out.artifact = emitted_;
  out.trail = trail_;
  return out;
}

GenerateResult generate(const Proposer& proposer, const PrefixDfa& dfa,
                        const Vocabulary& vocab, const DecodePolicy& policy,
                        std::uint64_t seed) {
  DecodeSession session(dfa, vocab, policy, seed);
  bool eos = false;
  while (session.step_count() < policy.max_steps) {
    if (session.current_mask().empty()) {
      // Only reachable when a coverage gate suppresses EOS at a state with
      // no byte continuations; closure still yields a valid artifact.
      break;
    }
    std::vector<double> weights = proposer(session.emitted(), session.step_count());
    int chosen = session.step(weights);
    if (vocab.is_eos(chosen)) {
      eos = true;
      break;
    }
  }
  if (!eos && session.step_count() >= policy.max_steps) {
    session.flag_max_steps_exhausted();
  }
  CloseResult closed = session.close();
  GenerateResult out;
  out.artifact = std::move(closed.artifact);
  out.struct_trace = std::move(closed.struct_trace);
  out.trail = std::move(closed.trail);
  out.eos_accepted = eos;
  return out;
}

PrefixDfa all_allow_dfa() {
  Nfa nfa;
  int s = nfa.add_state();
  int t = nfa.add_state();
  for (int b = 0; b < 256; ++b) {
    nfa.add_arc(s, static_cast<unsigned char>(b), s);
  }
  nfa.add_eps(s, t);
  nfa.start = s;
  nfa.accept = t;
  RawDfa raw = determinize(nfa);
  PrefixDfa dfa = annotate(raw);
  dfa.bind_identity(automaton_identity({GrammarKind::Regex, "<all-allow>", 0}));
  return dfa;
}

}  // namespace verigen
