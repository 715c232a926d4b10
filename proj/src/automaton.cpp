#include "verigen/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>

namespace verigen {

namespace {

void eps_closure(const Nfa& nfa, std::vector<int>& set) {
  std::vector<int> stack(set);
  std::vector<char> seen(nfa.states.size(), 0);
  for (int s : set) seen[std::size_t(s)] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : nfa.states[std::size_t(s)].eps) {
      if (!seen[std::size_t(t)]) {
        seen[std::size_t(t)] = 1;
        set.push_back(t);
        stack.push_back(t);
      }
    }
  }
  std::sort(set.begin(), set.end());
}

std::string pick_tag(const Nfa& nfa, const std::vector<int>& set) {
  // Deterministic choice: lexicographically least non-empty member tag.
  std::string best;
  for (int s : set) {
    const std::string& t = nfa.states[std::size_t(s)].tag;
    if (!t.empty() && (best.empty() || t < best)) best = t;
  }
  return best;
}

}  // namespace

RawDfa determinize(const Nfa& nfa, std::size_t state_cap,
                   const char* cap_error_code) {
  RawDfa dfa;
  std::map<std::vector<int>, int> ids;
  std::deque<std::vector<int>> work;

  std::vector<int> start_set{nfa.start};
  eps_closure(nfa, start_set);
  ids.emplace(start_set, 0);
  work.push_back(start_set);
  dfa.state_count = 1;
  dfa.start = 0;
  dfa.transitions.assign(256, -1);
  dfa.accepting.push_back(std::binary_search(start_set.begin(), start_set.end(),
                                             nfa.accept));
  dfa.tags.push_back(pick_tag(nfa, start_set));

  while (!work.empty()) {
    std::vector<int> cur = std::move(work.front());
    work.pop_front();
    int cur_id = ids.at(cur);

    // Gather successors per byte.
    std::map<unsigned char, std::vector<int>> moves;
    for (int s : cur) {
      for (const auto& [byte, to] : nfa.states[std::size_t(s)].arcs) {
        moves[byte].push_back(to);
      }
    }
    for (auto& [byte, set] : moves) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      eps_closure(nfa, set);
      auto [it, inserted] = ids.emplace(set, dfa.state_count);
      if (inserted) {
        if (std::size_t(dfa.state_count) >= state_cap) {
          throw Error(cap_error_code,
                      "determinized state count exceeds cap of " +
                          std::to_string(state_cap));
        }
        ++dfa.state_count;
        dfa.transitions.resize(std::size_t(dfa.state_count) * 256, -1);
        dfa.accepting.push_back(
            std::binary_search(set.begin(), set.end(), nfa.accept));
        dfa.tags.push_back(pick_tag(nfa, set));
        work.push_back(set);
      }
      dfa.transitions[std::size_t(cur_id) * 256 + byte] = it->second;
    }
  }
  return dfa;
}

PrefixDfa annotate(const RawDfa& raw) {
  int n = raw.state_count;

  // Reverse reachability from accepting states.
  std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int b = 0; b < 256; ++b) {
      std::int32_t t = raw.transitions[std::size_t(s) * 256 + std::size_t(b)];
      if (t >= 0) rev[std::size_t(t)].push_back(s);
    }
  }
  std::vector<char> live(std::size_t(n), 0);
  std::queue<int> bfs;
  for (int s = 0; s < n; ++s) {
    if (raw.accepting[std::size_t(s)]) {
      live[std::size_t(s)] = 1;
      bfs.push(s);
    }
  }
  while (!bfs.empty()) {
    int s = bfs.front();
    bfs.pop();
    for (int p : rev[std::size_t(s)]) {
      if (!live[std::size_t(p)]) {
        live[std::size_t(p)] = 1;
        bfs.push(p);
      }
    }
  }
  if (!live[std::size_t(raw.start)]) {
    throw Error("start-state-dead", "automaton accepts no string");
  }

  // Keep only states reachable from start AND reaching acceptance.
  std::vector<std::int32_t> remap(std::size_t(n), -1);
  std::vector<int> order;
  {
    std::queue<int> q;
    q.push(raw.start);
    remap[std::size_t(raw.start)] = 0;
    order.push_back(raw.start);
    while (!q.empty()) {
      int s = q.front();
      q.pop();
      for (int b = 0; b < 256; ++b) {
        std::int32_t t = raw.transitions[std::size_t(s) * 256 + std::size_t(b)];
        if (t >= 0 && live[std::size_t(t)] && remap[std::size_t(t)] < 0) {
          remap[std::size_t(t)] = std::int32_t(order.size());
          order.push_back(t);
          q.push(t);
        }
      }
    }
  }

  PrefixDfa out;
  out.state_count_ = int(order.size());
  out.start_ = 0;
  out.transitions_.assign(std::size_t(out.state_count_) * 256, -1);
  out.accepting_.resize(std::size_t(out.state_count_));
  out.tags_.resize(std::size_t(out.state_count_));
  for (std::size_t i = 0; i < order.size(); ++i) {
    int old = order[i];
    out.accepting_[i] = raw.accepting[std::size_t(old)];
    out.tags_[i] = raw.tags[std::size_t(old)];
    for (int b = 0; b < 256; ++b) {
      std::int32_t t = raw.transitions[std::size_t(old) * 256 + std::size_t(b)];
      if (t >= 0 && live[std::size_t(t)]) {
        out.transitions_[i * 256 + std::size_t(b)] = remap[std::size_t(t)];
      }
    }
  }

  // L(q): BFS distance to the accepting set over reversed retained edges.
  int m = out.state_count_;
  constexpr std::uint32_t kInf = 0xffffffffu;
  out.completion_len_.assign(std::size_t(m), kInf);
  std::vector<std::vector<int>> rrev(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    for (int b = 0; b < 256; ++b) {
      std::int32_t t = out.transitions_[std::size_t(s) * 256 + std::size_t(b)];
      if (t >= 0) rrev[std::size_t(t)].push_back(s);
    }
  }
  std::queue<int> q2;
  for (int s = 0; s < m; ++s) {
    if (out.accepting_[std::size_t(s)]) {
      out.completion_len_[std::size_t(s)] = 0;
      q2.push(s);
    }
  }
  while (!q2.empty()) {
    int s = q2.front();
    q2.pop();
    for (int p : rrev[std::size_t(s)]) {
      if (out.completion_len_[std::size_t(p)] == kInf) {
        out.completion_len_[std::size_t(p)] = out.completion_len_[std::size_t(s)] + 1;
        q2.push(p);
      }
    }
  }

  // T*(q): greedy walk picking the least byte that strictly decreases L.
  // Yields the lexicographically least among all shortest completions.
  out.completion_.resize(std::size_t(m));
  for (int s = 0; s < m; ++s) {
    std::string suffix;
    int cur = s;
    while (!out.accepting_[std::size_t(cur)]) {
      std::uint32_t want = out.completion_len_[std::size_t(cur)] - 1;
      int chosen = -1;
      for (int b = 0; b < 256; ++b) {
        std::int32_t t = out.transitions_[std::size_t(cur) * 256 + std::size_t(b)];
        if (t >= 0 && out.completion_len_[std::size_t(t)] == want) {
          suffix.push_back(char(b));
          chosen = t;
          break;
        }
      }
      cur = chosen;
    }
    out.completion_[std::size_t(s)] = std::move(suffix);
  }
  return out;
}

std::vector<int> PrefixDfa::run(std::string_view text) const {
  std::vector<int> states;
  states.reserve(text.size() + 1);
  std::int32_t q = start_;
  states.push_back(q);
  for (unsigned char c : text) {
    q = next(q, c);
    if (q == kDead) {
      throw Error("replay-divergence",
                  "undefined transition at offset " +
                      std::to_string(states.size() - 1));
    }
    states.push_back(q);
  }
  return states;
}

}  // namespace verigen
