#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verigen/common.hpp"
#include "verigen/rational.hpp"

namespace verigen {

// Logical-counter interval stamped on every trace; wall clock kept for
// human consumption only. Ordering checks (the sequential-composition
// precondition) use the logical counter.
struct TraceTimes {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::uint64_t wall_begin_ns = 0;
  std::uint64_t wall_end_ns = 0;

  static TraceTimes open() {
    TraceTimes t;
    t.begin = next_logical_time();
    t.wall_begin_ns = wall_clock_ns();
    return t;
  }
  void close() {
    end = next_logical_time();
    wall_end_ns = wall_clock_ns();
  }
};

// L1 certificate: the byte-level DFA run over the final artifact plus the
// closure bookkeeping from Theorem-style bounded repair.
struct StructTrace {
  std::vector<int> run;  // |artifact| + 1 states, start state first
  bool accepted = false;
  std::string automaton_id;
  int closure_events = 0;          // 0 or 1
  std::string closure_suffix;      // appended completion, if any
  bool max_steps_exhausted = false;
  TraceTimes time;

  bool pass() const { return accepted; }
};

struct SemViolation {
  std::string shape_id;
  std::string element_id;
  std::string path;                // "element-id / role-or-attr"
  std::string expected;            // human-readable expected condition
  std::string provenance;          // constraint record id or file ref
};

struct SemTrace {
  std::vector<std::string> shapes_checked;
  std::vector<SemViolation> violations;
  TraceTimes time;

  bool pass() const { return violations.empty(); }
};

// Certificate for one linear formula instance (optionally applied to one
// artifact element). sat carries a witness model; unsat carries a 1-minimal
// core plus Farkas multipliers so unsatisfiability can be re-checked by
// exact arithmetic alone.
struct LogicCert {
  std::string formula_id;
  std::string element_id;          // empty when the formula is global
  std::string provenance;
  bool sat = false;
  std::map<std::string, Rational> model;          // var -> value
  std::vector<std::string> core;                  // conjunct ids
  std::map<std::string, Rational> farkas;         // directed atom id -> multiplier
  TraceTimes time;

  bool pass() const { return sat; }
};

struct LogicTrace {
  std::vector<LogicCert> certs;
  TraceTimes time;

  bool pass() const {
    for (const auto& c : certs) {
      if (!c.sat) return false;
    }
    return true;
  }
};

// Per-step decode audit tuple.
struct AuditTuple {
  int step = 0;
  int state_before = 0;
  std::uint64_t allowed_count = 0;
  int token_id = 0;
  int state_after = 0;
  std::uint64_t latency_ns = 0;
  std::optional<std::vector<int>> full_allowed_set;  // full audit mode only
};

struct AuditEvent {
  enum Kind { Closure, Eos, CoverageGateFlip };
  Kind kind;
  int step = 0;
  std::string detail;
};

enum class AuditMode { Summary, Full, KeyEvent };

std::string audit_mode_name(AuditMode m);
AuditMode audit_mode_from_string(const std::string& s);

struct AuditTrail {
  std::string automaton_id;  // may be bound later (deferred context binding)
  AuditMode mode = AuditMode::Summary;
  std::vector<AuditTuple> tuples;
  std::vector<AuditEvent> events;

  std::size_t step_count() const { return tuples.size(); }

  // Line-delimited export: one JSON header line, then one tuple per line.
  std::string to_jsonl() const;
  static AuditTrail from_jsonl(const std::string& text);
};

}  // namespace verigen
