#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <set>
#include <thread>

#include <unistd.h>

#include "verigen/constraint_model.hpp"

using namespace verigen;
using nlohmann::json;

namespace {

TypedGraph demo_graph() {
  return build_typed_graph(R"({"source_id":"mm","nodes":[
      {"id":"n1","name":"OperationInvokedEvent","kind":"class",
       "attributes":{"period":"int[1,1000]"}},
      {"id":"n2","name":"Operation","kind":"class"},
      {"id":"n3","name":"Task","kind":"class","attributes":{"period":"int[1,1000]"}}],
    "edges":[{"src":"n1","dst":"n2","kind":"operation","cardinality":[1,1]}]})");
}

std::string temp_dir(const char* leaf) {
  auto p = std::filesystem::temp_directory_path() /
           ("verigen-test-" + std::to_string(::getpid())) / leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

ConstraintCandidate shape_candidate(const std::string& target) {
  ConstraintCandidate c;
  c.target = target;
  c.family = ConstraintFamily::Semantic;
  c.body = json::parse(R"({"requirements":[
      {"type":"ref_exists","role":"operation","dst_kind":"Operation"}]})");
  c.confidence = 0.9;
  c.doc_id = "doc1";
  c.para = 3;
  return c;
}

ConstraintCandidate logic_candidate(const std::string& target, long lo, long hi) {
  ConstraintCandidate c;
  c.target = target;
  c.family = ConstraintFamily::Logical;
  json body;
  body["variables"] = {"period"};
  body["conjuncts"] = json::array(
      {{{"id", "ge"}, {"terms", {{"period", 1}}}, {"op", ">="}, {"rhs", lo}},
       {{"id", "le"}, {"terms", {{"period", 1}}}, {"op", "<="}, {"rhs", hi}}});
  c.body = body;
  c.confidence = 0.8;
  return c;
}

}  // namespace

TEST_CASE("extract_channel1 turns edge cardinalities into shapes") {
  TypedGraph g = demo_graph();
  auto records = extract_channel1(g, R"({"source_id":"rules","rules":[]})");
  REQUIRE(records.size() == 1);
  const ConstraintRecord& r = records[0];
  CHECK(r.family == ConstraintFamily::Semantic);
  CHECK(r.layer == ConstraintLayer::L2Sem);
  CHECK(r.status == ConstraintStatus::Admitted);
  CHECK(r.anchor == "n1");
  const Shape& shape = std::get<SemanticBody>(r.body).shape;
  CHECK(shape.target_kind == "OperationInvokedEvent");
  REQUIRE(shape.requirements.size() == 2);  // cardinality [1,1] + ref-exists
  CHECK(shape.requirements[0].min == 1);
  CHECK(shape.requirements[0].max == 1);
}

TEST_CASE("extract_channel1 turns attribute ranges into logical records") {
  TypedGraph g = demo_graph();
  auto records = extract_channel1(g, R"({"rules":[
      {"kind":"Task","attr_ranges":{"period":[1,1000]}}]})");
  bool found = false;
  for (const auto& r : records) {
    if (r.family != ConstraintFamily::Logical) continue;
    found = true;
    CHECK(r.layer == ConstraintLayer::L2Logic);
    CHECK(r.anchor == "n3");
    const LinearFormula& f = std::get<LogicalBody>(r.body).formula;
    CHECK(f.conjuncts.size() == 2);
    CHECK(f.anchor_kind == "Task");
  }
  CHECK(found);
}

TEST_CASE("extract_channel1 turns name patterns into structural records") {
  TypedGraph g = demo_graph();
  auto records = extract_channel1(g, R"({"rules":[
      {"kind":"Task","name_pattern":"[A-Z][a-zA-Z0-9]*"}]})");
  bool found = false;
  for (const auto& r : records) {
    if (r.family != ConstraintFamily::Structural) continue;
    found = true;
    CHECK(r.layer == ConstraintLayer::L1);
    CHECK(std::get<StructuralBody>(r.body).grammar.kind == GrammarKind::Regex);
  }
  CHECK(found);
}

TEST_CASE("extract_channel1 rejects rules over unknown kinds") {
  TypedGraph g = demo_graph();
  try {
    extract_channel1(g, R"({"rules":[{"kind":"FluxCapacitor"}]})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "rule-references-unknown-kind");
  }
}

TEST_CASE("admit_candidate anchors and admits a compatible shape") {
  TypedGraph g = demo_graph();
  ConstraintRecord r = admit_candidate(shape_candidate("operation-invoked-event"),
                                       g, nullptr);
  CHECK(r.status == ConstraintStatus::Admitted);
  CHECK(r.anchor == "n1");
  CHECK(r.layer == ConstraintLayer::L2Sem);
  CHECK(std::get<SemanticBody>(r.body).shape.target_kind == "OperationInvokedEvent");
}

TEST_CASE("admit_candidate quarantines an unknown target") {
  TypedGraph g = demo_graph();
  ConstraintRecord r = admit_candidate(shape_candidate("FluxCapacitor"), g, nullptr);
  CHECK(r.status == ConstraintStatus::Quarantined);
  CHECK(r.anchor == kAbstractAnchor);
  CHECK(r.quarantine_reason == "no-anchor");
}

TEST_CASE("admit_candidate quarantines an unsatisfiable logical body") {
  TypedGraph g = demo_graph();
  ConstraintRecord r = admit_candidate(logic_candidate("Task", 5, 3), g, nullptr);
  CHECK(r.status == ConstraintStatus::Quarantined);
  CHECK(r.quarantine_reason.find("incompatible") == 0);
}

TEST_CASE("admission is exclusive: anchored-and-compatible XOR quarantined") {
  TypedGraph g = demo_graph();
  std::vector<ConstraintCandidate> candidates = {
      shape_candidate("operation-invoked-event"),
      shape_candidate("FluxCapacitor"),
      logic_candidate("Task", 5, 3),
      logic_candidate("Task", 1, 100),
      logic_candidate("nonsense-target-zzz", 0, 1),
  };
  for (const auto& c : candidates) {
    ConstraintRecord r = admit_candidate(c, g, nullptr);
    bool admitted_ok =
        r.status == ConstraintStatus::Admitted && r.anchor != kAbstractAnchor;
    bool quarantined = r.status == ConstraintStatus::Quarantined;
    CHECK(admitted_ok != quarantined);  // exactly one, never neither
  }
}

TEST_CASE("check_semantic_compatibility: interval intersection oracle") {
  TypedGraph g = demo_graph();
  ConstraintRecord ok = admit_candidate(logic_candidate("Task", 0, 5), g, nullptr);
  CHECK(ok.status == ConstraintStatus::Admitted);
  TypedGraph narrow = build_typed_graph(R"({"nodes":[
      {"id":"n1","name":"Task","kind":"class","attributes":{"x":"int[0,5]"}}]})");
  ConstraintCandidate c;
  c.target = "Task";
  c.family = ConstraintFamily::Logical;
  c.body = json::parse(R"({"variables":["x"],
      "conjuncts":[{"id":"ge7","terms":{"x":1},"op":">=","rhs":7}]})");
  ConstraintRecord r = admit_candidate(c, narrow, nullptr);
  CHECK(r.status == ConstraintStatus::Quarantined);
}

TEST_CASE("check_semantic_compatibility: witness satisfies the shape") {
  TypedGraph g = demo_graph();
  ConstraintRecord r = admit_candidate(shape_candidate("operation-invoked-event"),
                                       g, nullptr);
  CompatibilityResult compat = check_semantic_compatibility(r, g);
  REQUIRE(compat.outcome == CompatibilityResult::Compatible);
  CHECK(!compat.witness.empty());
  CHECK(compat.witness.find("Operation") != std::string::npos);
}

TEST_CASE("semantic requirement on an absent kind is incompatible") {
  TypedGraph g = demo_graph();
  ConstraintCandidate c;
  c.target = "Task";
  c.family = ConstraintFamily::Semantic;
  c.body = json::parse(R"({"requirements":[
      {"type":"ref_exists","role":"engine","dst_kind":"WarpDrive"}]})");
  ConstraintRecord r = admit_candidate(c, g, nullptr);
  CHECK(r.status == ConstraintStatus::Quarantined);
  CHECK(r.quarantine_reason.find("incompatible") == 0);
}

TEST_CASE("icm store: put, list ordering, promote idempotence") {
  std::string dir = temp_dir("icm");
  IcmStore store(dir);
  TypedGraph g = demo_graph();
  ConstraintRecord a = admit_candidate(shape_candidate("operation-invoked-event"),
                                       g, &store);
  admit_candidate(shape_candidate("FluxCapacitor"), g, &store);
  auto all = store.list();
  REQUIRE(all.size() == 2);
  CHECK(all[0].status == ConstraintStatus::Admitted);
  CHECK(all[1].status == ConstraintStatus::Quarantined);

  ConstraintRecord promoted = store.promote(a.id);
  CHECK(promoted.status == ConstraintStatus::Promoted);
  ConstraintRecord again = store.promote(a.id);
  CHECK(again.status == ConstraintStatus::Promoted);
  auto after = store.list();
  REQUIRE(after.size() == 2);  // promoted copy shadows the admitted one
  CHECK(after[0].status == ConstraintStatus::Promoted);
  CHECK(after[0].id == a.id);

  try {
    store.promote("nope");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "unknown-provenance");
  }
}

TEST_CASE("ephemeral records are never persisted") {
  std::string dir = temp_dir("icm-eph");
  IcmStore store(dir);
  TypedGraph g = demo_graph();
  SynthesisOutcome out = synthesize_dynamic({logic_candidate("Task", 1, 10)}, g);
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].status == ConstraintStatus::Ephemeral);
  CHECK(store.list().empty());
  CHECK_THROWS_AS(store.put(out.records[0]), Error);
}

TEST_CASE("synthesize_dynamic drops the later conflicting candidate") {
  TypedGraph g = demo_graph();
  SynthesisOutcome out = synthesize_dynamic(
      {logic_candidate("Task", 0, 10),    // period <= 10
       logic_candidate("Task", 20, 30)},  // period >= 20: jointly unsat
      g);
  REQUIRE(out.records.size() == 1);
  REQUIRE(out.conflict_log.size() == 1);
  CHECK(out.conflict_log[0].find("relaxation") != std::string::npos);
}

TEST_CASE("synthesize_dynamic: empty request, single candidate") {
  TypedGraph g = demo_graph();
  CHECK(synthesize_dynamic({}, g).records.empty());
  auto one = synthesize_dynamic({logic_candidate("Task", 1, 10)}, g);
  CHECK(one.records.size() == 1);
}

TEST_CASE("layer assignment is total and family-determined") {
  TypedGraph g = demo_graph();
  ConstraintRecord sem = admit_candidate(shape_candidate("operation-invoked-event"),
                                         g, nullptr);
  ConstraintRecord log = admit_candidate(logic_candidate("Task", 1, 10), g, nullptr);
  CHECK(sem.layer == ConstraintLayer::L2Sem);
  CHECK(log.layer == ConstraintLayer::L2Logic);
  CHECK(layer_of(ConstraintFamily::Structural) == ConstraintLayer::L1);
}

TEST_CASE("dependency lattice: default stratification") {
  ConstraintRecord s, m, l;
  s.id = "s";
  s.family = ConstraintFamily::Structural;
  m.id = "m";
  m.family = ConstraintFamily::Semantic;
  l.id = "l";
  l.family = ConstraintFamily::Logical;
  DependencyLattice lattice = build_dependency_lattice({s, m, l});
  CHECK(lattice.precedes("s", "m"));
  CHECK(lattice.precedes("m", "l"));
  CHECK(lattice.precedes("s", "l"));
  CHECK_FALSE(lattice.precedes("l", "s"));
}

TEST_CASE("dependency lattice: symbol coupling within a family") {
  ConstraintRecord m1, m2;
  m1.id = "m1";
  m1.family = ConstraintFamily::Semantic;
  m1.defines = {"Comp.port-value"};
  m2.id = "m2";
  m2.family = ConstraintFamily::Semantic;
  m2.uses = {"Comp.port-value"};
  DependencyLattice lattice = build_dependency_lattice({m2, m1});
  CHECK(lattice.precedes("m1", "m2"));
  CHECK_FALSE(lattice.precedes("m2", "m1"));
}

TEST_CASE("dependency lattice: mutual references are a cycle error") {
  ConstraintRecord l1, l2;
  l1.id = "l1";
  l1.family = ConstraintFamily::Logical;
  l1.defines = {"x"};
  l1.uses = {"y"};
  l2.id = "l2";
  l2.family = ConstraintFamily::Logical;
  l2.defines = {"y"};
  l2.uses = {"x"};
  try {
    build_dependency_lattice({l1, l2});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "dependency-cycle");
    CHECK(std::string(e.what()).find("l1") != std::string::npos);
    CHECK(std::string(e.what()).find("l2") != std::string::npos);
  }
}

TEST_CASE("record JSON round-trip") {
  TypedGraph g = demo_graph();
  ConstraintRecord r = admit_candidate(shape_candidate("operation-invoked-event"),
                                       g, nullptr);
  ConstraintRecord back = ConstraintRecord::from_json(r.to_json());
  CHECK(back.id == r.id);
  CHECK(back.status == r.status);
  CHECK(back.anchor == r.anchor);
  CHECK(back.to_json() == r.to_json());
}

TEST_CASE("candidate file parsing enforces the documented schema") {
  std::string good = R"([{"target":"Task","family":"logical",
      "body":{"variables":["period"],
              "conjuncts":[{"id":"c","terms":{"period":1},"op":"<=","rhs":10}]},
      "confidence":0.7,"doc_id":"d1","para":4}])";
  auto parsed = ConstraintCandidate::parse_file(good);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].target == "Task");
  CHECK(parsed[0].family == ConstraintFamily::Logical);
  CHECK(parsed[0].doc_id == "d1");
  CHECK(parsed[0].para == 4);

  CHECK_THROWS_AS(ConstraintCandidate::parse_file("{}"), Error);  // not an array
  CHECK_THROWS_AS(ConstraintCandidate::parse_file(
                      R"([{"target":"T","family":"structural","body":{}}])"),
                  Error);  // candidates are L2-only
  CHECK_THROWS_AS(ConstraintCandidate::parse_file(
                      R"([{"target":"T","family":"logical","body":{},"confidence":2}])"),
                  Error);  // confidence out of range
}

TEST_CASE("concurrent readers against an exclusive writer") {
  std::string dir = temp_dir("icm-conc");
  IcmStore store(dir);
  TypedGraph g = demo_graph();
  std::vector<std::thread> readers;
  std::atomic<int> records_seen{0};
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&]() {
      // Bounded read loop; an unbounded spin can starve the writer under
      // reader-preferring rwlocks.
      for (int i = 0; i < 50; ++i) {
        records_seen += int(store.list().size());
      }
    });
  }
  for (int i = 0; i < 20; ++i) {
    admit_candidate(logic_candidate("Task", 1, 10 + i), g, &store);
  }
  for (auto& r : readers) r.join();
  CHECK(store.list().size() == 20);
  CHECK(records_seen.load() >= 0);
}
