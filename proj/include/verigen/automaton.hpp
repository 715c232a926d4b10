#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "verigen/common.hpp"

namespace verigen {

// Default ceiling on determinized state count. Compilation fails loudly
// instead of blowing up silently.
inline constexpr std::size_t kDefaultStateCap = 100000;

// Thompson-style NFA with epsilon arcs. Intermediate representation shared
// by the regex, schema and gbnf front ends. States may carry a symbol tag
// (originating grammar symbol) used downstream for coverage gates.
struct Nfa {
  struct State {
    std::vector<int> eps;
    std::vector<std::pair<unsigned char, int>> arcs;
    std::string tag;
  };

  std::vector<State> states;
  int start = -1;
  int accept = -1;

  int add_state(std::string tag = {}) {
    states.push_back(State{{}, {}, std::move(tag)});
    return int(states.size()) - 1;
  }
  void add_eps(int from, int to) { states[from].eps.push_back(to); }
  void add_arc(int from, unsigned char byte, int to) {
    states[from].arcs.emplace_back(byte, to);
  }
};

// Deterministic automaton before pruning/annotation.
struct RawDfa {
  int state_count = 0;
  int start = 0;
  std::vector<std::int32_t> transitions;  // state_count * 256, -1 = undefined
  std::vector<bool> accepting;
  std::vector<std::string> tags;

  std::int32_t next(int state, unsigned char byte) const {
    return transitions[std::size_t(state) * 256 + byte];
  }
};

// Pruned, prefix-closed DFA: every retained state reaches acceptance.
// Carries shortest-completion lengths L(q) and the lexicographically least
// shortest completion string per state. Immutable after construction.
class PrefixDfa {
public:
  static constexpr std::int32_t kDead = -1;

  int start() const { return start_; }
  int state_count() const { return state_count_; }
  std::int32_t next(int state, unsigned char byte) const {
    return transitions_[std::size_t(state) * 256 + byte];
  }
  bool accepting(int state) const { return accepting_[std::size_t(state)]; }
  bool reach_accept(int state) const {
    return state >= 0 && state < state_count_;  // all retained states do
  }
  std::uint32_t completion_len(int state) const {
    return completion_len_[std::size_t(state)];
  }
  const std::string& completion(int state) const {
    return completion_[std::size_t(state)];
  }
  const std::string& symbol_tag(int state) const {
    return tags_[std::size_t(state)];
  }

  const std::string& automaton_id() const { return automaton_id_; }
  void bind_identity(std::string hex_digest) { automaton_id_ = std::move(hex_digest); }

  // Folds bytes from `state`; returns kDead as soon as a transition is
  // undefined.
  std::int32_t fold(int state, std::string_view bytes) const {
    std::int32_t q = state;
    for (unsigned char c : bytes) {
      q = next(q, c);
      if (q == kDead) return kDead;
    }
    return q;
  }

  bool accepts(std::string_view text) const {
    std::int32_t q = fold(start_, text);
    return q != kDead && accepting(q);
  }

  // Byte-level run over `text` starting at the start state: the returned
  // sequence has |text|+1 entries (start state first). Throws
  // "replay-divergence" if a transition is undefined.
  std::vector<int> run(std::string_view text) const;

  friend PrefixDfa annotate(const RawDfa& raw);

private:
  int state_count_ = 0;
  int start_ = 0;
  std::vector<std::int32_t> transitions_;
  std::vector<bool> accepting_;
  std::vector<std::uint32_t> completion_len_;
  std::vector<std::string> completion_;
  std::vector<std::string> tags_;
  std::string automaton_id_;
};

// Subset construction. `cap_error_code` names the error thrown when the
// state count exceeds `state_cap`.
RawDfa determinize(const Nfa& nfa, std::size_t state_cap = kDefaultStateCap,
                   const char* cap_error_code = "state-cap-exceeded");

// Removes states that cannot reach acceptance, renumbers, and computes
// L(q) / T*(q) by reverse BFS. Throws "start-state-dead" when the language
// is empty.
PrefixDfa annotate(const RawDfa& raw);

}  // namespace verigen
