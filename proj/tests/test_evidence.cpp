#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include <unistd.h>

#include "verigen/decoder.hpp"
#include "verigen/evidence.hpp"
#include "verigen/grammar.hpp"
#include "verigen/registry.hpp"

using namespace verigen;
using nlohmann::json;

namespace {

std::string temp_dir(const char* leaf) {
  auto p = std::filesystem::temp_directory_path() /
           ("verigen-test-" + std::to_string(::getpid())) / leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

GenericTrace trace_at(std::uint64_t t0, std::uint64_t t1, bool pass) {
  GenericTrace t;
  t.layer = "t";
  t.time.begin = t0;
  t.time.end = t1;
  t.pass = pass;
  return t;
}

// A full passing pipeline result over the grammar "ab*".
struct Fixture {
  PrefixDfa dfa = compile_regex("ab*");
  Vocabulary vocab = Vocabulary::from_tokens({"a", "b", ""}, 2);
  GenerateResult gen;
  EvidenceBundle bundle;
  std::string artifact;

  Fixture() {
    DecodePolicy policy;
    policy.max_steps = 6;
    gen = generate(make_uniform_proposer(vocab.size()), dfa, vocab, policy, 11);
    artifact = gen.artifact;
    ArtifactGraph graph = project_artifact("", {});
    (void)graph;
    SemTrace sem = validate_semantic(project_artifact("", {}), {});
    LogicTrace logic = run_logic_validators(project_artifact("", {}), {});
    bundle = compose_bundle(gen.struct_trace, std::move(sem), std::move(logic), artifact);
    bundle = enrich(std::move(bundle), gen.trail);
  }
};

}  // namespace

TEST_CASE("compose_seq enforces the temporal ordering condition") {
  GenericTrace a = trace_at(1, 10, true);
  GenericTrace b = trace_at(11, 20, true);
  GenericTrace ab = compose_seq(a, b);
  CHECK(verifier(ab));
  CHECK(ab.time.begin == 1);
  CHECK(ab.time.end == 20);

  GenericTrace early = trace_at(9, 12, true);
  CHECK_THROWS_AS(compose_seq(a, early), Error);
  try {
    compose_seq(a, early);
  } catch (const Error& e) {
    CHECK(e.code() == "temporal-order-violation");
  }
}

TEST_CASE("verifier composition law on all boolean combinations") {
  for (bool p1 : {false, true}) {
    for (bool p2 : {false, true}) {
      GenericTrace a = trace_at(1, 2, p1);
      GenericTrace b = trace_at(3, 4, p2);
      CHECK(verifier(compose_seq(a, b)) == (p1 && p2));
    }
  }
}

TEST_CASE("evidence laws hold on randomized fixtures") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t t0 = rng() % 1000;
    std::uint64_t len1 = rng() % 50;
    std::uint64_t gap = rng() % 50;
    std::uint64_t len2 = rng() % 50;
    bool p1 = rng() % 2 == 0;
    bool p2 = rng() % 2 == 0;
    GenericTrace a = trace_at(t0, t0 + len1, p1);
    GenericTrace b = trace_at(t0 + len1 + gap, t0 + len1 + gap + len2, p2);
    GenericTrace ab = compose_seq(a, b);
    CHECK(verifier(ab) == (verifier(a) && verifier(b)));
  }
}

TEST_CASE("enrich attaches audit metadata without changing the verdict") {
  Fixture fx;
  SemTrace sem = validate_semantic(project_artifact("", {}), {});
  LogicTrace logic = run_logic_validators(project_artifact("", {}), {});
  EvidenceBundle plain = compose_bundle(fx.gen.struct_trace, sem, logic, fx.artifact);
  bool before = plain.verdict();
  EvidenceBundle enriched = enrich(plain, fx.gen.trail);
  CHECK(enriched.verdict() == before);
  CHECK(enriched.audit_attached);
  CHECK(enriched.audit_automaton_id == fx.dfa.automaton_id());
  CHECK(enriched.audit_metadata.contains("steps"));
}

TEST_CASE("enrich rejects a mismatched automaton id") {
  Fixture fx;
  AuditTrail trail = fx.gen.trail;
  trail.automaton_id = std::string(64, '0');
  SemTrace sem = validate_semantic(project_artifact("", {}), {});
  LogicTrace logic = run_logic_validators(project_artifact("", {}), {});
  EvidenceBundle plain = compose_bundle(fx.gen.struct_trace, sem, logic, fx.artifact);
  try {
    enrich(plain, trail);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "automaton-id-mismatch");
  }
}

TEST_CASE("enrich accepts an empty trail (deferred binding, zero steps)") {
  Fixture fx;
  AuditTrail empty;
  SemTrace sem = validate_semantic(project_artifact("", {}), {});
  LogicTrace logic = run_logic_validators(project_artifact("", {}), {});
  EvidenceBundle plain = compose_bundle(fx.gen.struct_trace, sem, logic, fx.artifact);
  EvidenceBundle enriched = enrich(plain, empty);
  CHECK(enriched.audit_attached);
  CHECK(enriched.audit_automaton_id == fx.dfa.automaton_id());  // bound at enrich time
}

TEST_CASE("seal is deterministic in (artifact, bundle, timestamp)") {
  Fixture fx;
  EvidenceBundle a = seal_bundle(fx.bundle, fx.artifact, 12345);
  EvidenceBundle b = seal_bundle(fx.bundle, fx.artifact, 12345);
  CHECK(a.seal->digest == b.seal->digest);
  EvidenceBundle c = seal_bundle(fx.bundle, fx.artifact, 12346);
  CHECK(a.seal->digest != c.seal->digest);
  CHECK_THROWS_AS(seal_bundle(a, fx.artifact, 1), Error);  // already sealed
  try {
    seal_bundle(a, fx.artifact, 1);
  } catch (const Error& e) {
    CHECK(e.code() == "already-sealed");
  }
}

TEST_CASE("verify round-trips a passing run") {
  Fixture fx;
  EvidenceBundle sealed = seal_bundle(fx.bundle, fx.artifact, next_logical_time());
  VerifyOutcome out = verify_bundle(sealed, fx.artifact, fx.dfa, {}, {}, {});
  CHECK(out.verdict);
  CHECK(out.failure.empty());
}

TEST_CASE("verify flags a flipped artifact byte as divergence") {
  Fixture fx;
  EvidenceBundle sealed = seal_bundle(fx.bundle, fx.artifact, next_logical_time());
  std::string tampered = fx.artifact;
  tampered[0] = tampered[0] == 'a' ? 'b' : 'a';
  VerifyOutcome out = verify_bundle(sealed, tampered, fx.dfa, {}, {}, {});
  CHECK_FALSE(out.verdict);
  CHECK((out.failure == "seal-mismatch" || out.failure == "replay-divergence"));
}

TEST_CASE("verify flags the wrong grammar source as identity mismatch") {
  Fixture fx;
  EvidenceBundle sealed = seal_bundle(fx.bundle, fx.artifact, next_logical_time());
  PrefixDfa other = compile_regex("a");
  VerifyOutcome out = verify_bundle(sealed, fx.artifact, other, {}, {}, {});
  CHECK_FALSE(out.verdict);
  CHECK(out.failure == "identity-mismatch");
}

TEST_CASE("verify reports a recorded failing trace as validation-failed") {
  Fixture fx;
  EvidenceBundle bundle = fx.bundle;
  SemViolation v;
  v.shape_id = "s";
  v.element_id = "e";
  v.path = "e / role";
  v.expected = "whatever";
  bundle.sem_trace.violations.push_back(v);
  CHECK_FALSE(bundle.verdict());
  VerifyOutcome out = verify_bundle(bundle, fx.artifact, fx.dfa, {}, {}, {});
  CHECK_FALSE(out.verdict);
  CHECK(out.failure == "validation-failed");
}

TEST_CASE("bundle canonical serialization round-trips") {
  Fixture fx;
  EvidenceBundle sealed = seal_bundle(fx.bundle, fx.artifact, next_logical_time());
  std::string canon = sealed.canonical();
  EvidenceBundle back = EvidenceBundle::from_json(json::parse(canon));
  CHECK(back.canonical() == canon);
  CHECK(back.verdict() == sealed.verdict());
  CHECK(back.seal->digest == sealed.seal->digest);
}

TEST_CASE("incremental soundness: every passing prefix extends to acceptance") {
  Fixture fx;
  // Truncate the run at every byte offset; extend with the completion.
  for (std::size_t cut = 0; cut + 1 < fx.gen.struct_trace.run.size(); ++cut) {
    int state = fx.gen.struct_trace.run[cut];
    std::string prefix = fx.artifact.substr(0, cut);
    std::string extended = prefix + fx.dfa.completion(state);
    CHECK(fx.dfa.accepts(extended));
  }
}

TEST_CASE("registry: dedup, fetch, eviction, append-only") {
  Registry registry(temp_dir("reg"), 2);
  std::string a1 = registry.append("alpha");
  std::string a2 = registry.append("alpha");
  CHECK(a1 == a2);
  CHECK(registry.list_addresses().size() == 1);

  std::string b = registry.append("beta");
  std::string c = registry.append("gamma");
  CHECK(registry.list_addresses().size() == 3);

  // Cache holds 2 entries; alpha was evicted but survives on disk.
  registry.drop_cache();
  auto got = registry.fetch(a1);
  REQUIRE(got.has_value());
  CHECK(*got == "alpha");
  CHECK(registry.fetch("deadbeef") == std::nullopt);

  // Re-reading any address yields identical bytes.
  CHECK(*registry.fetch(b) == "beta");
  CHECK(*registry.fetch(c) == "gamma");
}

TEST_CASE("registry manifest is line-oriented and ordered") {
  Registry registry(temp_dir("reg-manifest"));
  registry.manifest_append({"a1", "b1", "v1"});
  registry.manifest_append({"a1", "b2", "v2"});
  auto entries = registry.manifest();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].version_tag == "v1");
  CHECK(entries[1].version_tag == "v2");
  CHECK(entries[1].bundle_address == "b2");
}

TEST_CASE("registry addresses are content hashes") {
  Registry registry(temp_dir("reg-hash"));
  std::string addr = registry.append("hello");
  CHECK(addr ==
        "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
}

TEST_CASE("concurrent registry appends are safe and deduplicated") {
  Registry registry(temp_dir("reg-conc"), 8);
  std::vector<std::thread> workers;
  std::vector<std::string> addrs(16);
  for (int t = 0; t < 16; ++t) {
    workers.emplace_back([&, t]() {
      // Half the writers race on the same content.
      std::string content = t % 2 == 0 ? "shared-content" : "unique-" + std::to_string(t);
      addrs[std::size_t(t)] = registry.append(content);
    });
  }
  for (auto& w : workers) w.join();
  std::set<std::string> unique(addrs.begin(), addrs.end());
  CHECK(unique.size() == 9);  // 1 shared + 8 unique
  for (const std::string& a : unique) {
    CHECK(registry.fetch(a).has_value());
  }
}
