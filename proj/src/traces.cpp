#include "verigen/traces.hpp"

#include <sstream>

#include <json.hpp>

namespace verigen {

using nlohmann::json;

std::string AuditTrail::to_jsonl() const {
  std::string out;
  json header;
  header["automaton_id"] = automaton_id;
  header["mode"] = audit_mode_name(mode);
  header["steps"] = tuples.size();
  out += header.dump();
  out.push_back('\n');
  for (const AuditTuple& t : tuples) {
    json j;
    j["t"] = t.step;
    j["s0"] = t.state_before;
    j["m"] = t.allowed_count;
    j["y"] = t.token_id;
    j["s1"] = t.state_after;
    j["dt_ns"] = t.latency_ns;
    if (t.full_allowed_set) j["allowed"] = *t.full_allowed_set;
    out += j.dump();
    out.push_back('\n');
  }
  for (const AuditEvent& e : events) {
    json j;
    j["event"] = e.kind == AuditEvent::Closure
                     ? "closure"
                     : (e.kind == AuditEvent::Eos ? "eos" : "coverage-gate");
    j["t"] = e.step;
    j["detail"] = e.detail;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

AuditTrail AuditTrail::from_jsonl(const std::string& text) {
  AuditTrail trail;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (!have_header) {
      trail.automaton_id = j.at("automaton_id").get<std::string>();
      trail.mode = audit_mode_from_string(j.at("mode").get<std::string>());
      have_header = true;
      continue;
    }
    if (j.contains("event")) {
      AuditEvent e;
      std::string kind = j.at("event").get<std::string>();
      e.kind = kind == "closure" ? AuditEvent::Closure
                                 : (kind == "eos" ? AuditEvent::Eos
                                                  : AuditEvent::CoverageGateFlip);
      e.step = j.at("t").get<int>();
      e.detail = j.at("detail").get<std::string>();
      trail.events.push_back(std::move(e));
      continue;
    }
    AuditTuple t;
    t.step = j.at("t").get<int>();
    t.state_before = j.at("s0").get<int>();
    t.allowed_count = j.at("m").get<std::uint64_t>();
    t.token_id = j.at("y").get<int>();
    t.state_after = j.at("s1").get<int>();
    t.latency_ns = j.at("dt_ns").get<std::uint64_t>();
    if (j.contains("allowed")) {
      t.full_allowed_set = j.at("allowed").get<std::vector<int>>();
    }
    trail.tuples.push_back(std::move(t));
  }
  if (!have_header) throw Error("trail-invalid", "missing header line");
  return trail;
}

}  // namespace verigen
