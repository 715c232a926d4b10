#include <doctest.h>

#include <chrono>
#include <set>

#include <json.hpp>

#include "verigen/model_graph.hpp"

using namespace verigen;
using nlohmann::json;

namespace {

std::string two_node_decl() {
  return R"({"source_id":"g1","nodes":[
      {"id":"A","name":"A","kind":"entity"},
      {"id":"B","name":"B","kind":"entity"}],
    "edges":[{"src":"A","dst":"B","kind":"ref","cardinality":[1,1]}]})";
}

// Canonical signature for isomorphism-up-to-renaming comparison.
json graph_signature(const TypedGraph& g) {
  json nodes = json::array();
  for (const Entity& n : g.nodes) {
    json prov = json::array();
    auto it = g.provenance.find(n.id);
    if (it != g.provenance.end()) {
      for (const SourceRef& r : it->second) prov.push_back(r.source_id);
    }
    nodes.push_back({{"name", n.name}, {"kind", n.kind}, {"prov", prov}});
  }
  json edges = json::array();
  for (const Relation& e : g.edges) {
    const Entity* s = g.find_node(e.src);
    const Entity* d = g.find_node(e.dst);
    edges.push_back({{"src", s->name}, {"dst", d->name}, {"kind", e.kind}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace

TEST_CASE("build_typed_graph constructs nodes, edges and self-provenance") {
  TypedGraph g = build_typed_graph(two_node_decl());
  CHECK(g.nodes.size() == 2);
  CHECK(g.edges.size() == 1);
  for (const Entity& n : g.nodes) {
    REQUIRE(g.provenance.count(n.id) == 1);
    CHECK(!g.provenance.at(n.id).empty());
  }
}

TEST_CASE("empty declaration yields an empty graph") {
  TypedGraph g = build_typed_graph("{}");
  CHECK(g.nodes.empty());
  CHECK(g.edges.empty());
}

TEST_CASE("dangling edge endpoint is an error") {
  std::string decl = R"({"nodes":[{"id":"A","name":"A","kind":"entity"}],
                         "edges":[{"src":"A","dst":"C","kind":"ref"}]})";
  try {
    build_typed_graph(decl);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "dangling-edge-endpoint");
  }
}

TEST_CASE("duplicate node id is an error") {
  std::string decl = R"({"nodes":[{"id":"A"},{"id":"A"}]})";
  try {
    build_typed_graph(decl);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "duplicate-id");
  }
}

TEST_CASE("merge with one hint unions provenance") {
  TypedGraph g1 = build_typed_graph(
      R"({"source_id":"G1","nodes":[{"id":"A","name":"Alpha","kind":"entity"},
                                    {"id":"B","name":"B","kind":"entity"}]})");
  TypedGraph g2 = build_typed_graph(
      R"({"source_id":"G2","nodes":[{"id":"A2","name":"Alpha2","kind":"entity"},
                                    {"id":"C","name":"C","kind":"entity"}]})");
  MergeOutcome out = merge_graphs({g1, g2}, {{0, "A", 1, "A2"}},
                                  MergeOptions{.auto_hints = false});
  CHECK(out.graph.nodes.size() == 3);
  CHECK(out.unions_performed == 1);
  const Entity* merged = out.graph.find_node_by_name("Alpha");
  REQUIRE(merged != nullptr);
  auto prov = out.graph.provenance.at(merged->id);
  std::set<std::string> sources;
  for (const SourceRef& r : prov) sources.insert(r.source_id);
  CHECK(sources == std::set<std::string>{"G1", "G2"});
}

TEST_CASE("merge without hints is a disjoint union") {
  TypedGraph g1 = build_typed_graph(R"({"nodes":[{"id":"A","name":"A"},{"id":"B","name":"B"}]})");
  TypedGraph g2 = build_typed_graph(R"({"nodes":[{"id":"C","name":"C"}]})");
  MergeOutcome out = merge_graphs({g1, g2}, {});
  CHECK(out.graph.nodes.size() == 3);
  CHECK(out.unions_performed == 0);
}

TEST_CASE("chained hints across three graphs collapse to one node") {
  auto make = [](const std::string& src) {
    return build_typed_graph(R"({"source_id":")" + src +
                             R"(","nodes":[{"id":"p","name":"Port","kind":"entity"}]})");
  };
  TypedGraph a = make("S1"), b = make("S2"), c = make("S3");
  MergeOutcome out = merge_graphs({a, b, c}, {{0, "p", 1, "p"}, {1, "p", 2, "p"}},
                                  MergeOptions{.auto_hints = false});
  REQUIRE(out.graph.nodes.size() == 1);
  // Exhaustive pairwise equality after canonicalizing names: all three
  // members had the same canonical name, so provenance has 3 sources.
  CHECK(out.graph.provenance.at(out.graph.nodes[0].id).size() == 3);
}

TEST_CASE("kind-mismatch hints are rejected, logged and non-fatal") {
  TypedGraph g1 = build_typed_graph(R"({"nodes":[{"id":"A","name":"A","kind":"class"}]})");
  TypedGraph g2 = build_typed_graph(R"({"nodes":[{"id":"B","name":"A","kind":"attr"}]})");
  MergeOutcome out = merge_graphs({g1, g2}, {{0, "A", 1, "B"}},
                                  MergeOptions{.auto_hints = false});
  CHECK(out.graph.nodes.size() == 2);
  REQUIRE(out.rejected_hints.size() == 1);
  CHECK(out.rejected_hints[0].find("kind mismatch") != std::string::npos);
}

TEST_CASE("merge is order-insensitive up to id renaming") {
  TypedGraph g1 = build_typed_graph(
      R"({"source_id":"G1","nodes":[{"id":"A","name":"Alpha","kind":"k"},
                                    {"id":"B","name":"Beta","kind":"k"}],
          "edges":[{"src":"A","dst":"B","kind":"r"}]})");
  TypedGraph g2 = build_typed_graph(
      R"({"source_id":"G2","nodes":[{"id":"X","name":"alpha","kind":"k"},
                                    {"id":"Y","name":"Gamma","kind":"k"}],
          "edges":[{"src":"X","dst":"Y","kind":"r"}]})");
  MergeOutcome ab = merge_graphs({g1, g2}, {{0, "A", 1, "X"}});
  MergeOutcome ba = merge_graphs({g2, g1}, {{1, "A", 0, "X"}});
  CHECK(graph_signature(ab.graph) == graph_signature(ba.graph));
}

TEST_CASE("auto hints union exact canonical name matches of equal kind") {
  TypedGraph g1 = build_typed_graph(
      R"({"source_id":"G1","nodes":[{"id":"n1","name":"OperationInvokedEvent","kind":"k"}]})");
  TypedGraph g2 = build_typed_graph(
      R"({"source_id":"G2","nodes":[{"id":"n2","name":"operation-invoked-event","kind":"k"}]})");
  MergeOutcome out = merge_graphs({g1, g2}, {});
  CHECK(out.graph.nodes.size() == 1);
  CHECK(out.unions_performed == 1);
}

TEST_CASE("align_candidate canonicalization gives score 1.0") {
  TypedGraph g = build_typed_graph(
      R"({"nodes":[{"id":"n1","name":"OperationInvokedEvent","kind":"k"},
                   {"id":"n2","name":"Operation","kind":"k"}]})");
  AlignmentResult r = align_candidate("operation-invoked-event", g, 0.85);
  CHECK(r.disposition == Disposition::Aligned);
  CHECK(r.score == doctest::Approx(1.0));
  CHECK(*r.matched_node_id == "n1");
}

TEST_CASE("align_candidate quarantines dissimilar names") {
  TypedGraph g = build_typed_graph(
      R"({"nodes":[{"id":"n1","name":"OperationInvokedEvent","kind":"k"}]})");
  AlignmentResult r = align_candidate("FooBarBaz", g, 0.85);
  CHECK(r.disposition == Disposition::Quarantined);
  CHECK_FALSE(r.matched_node_id.has_value());
}

TEST_CASE("theta zero aligns to the best node of a non-empty graph") {
  TypedGraph g = build_typed_graph(
      R"({"nodes":[{"id":"n1","name":"Aaa","kind":"k"},{"id":"n2","name":"Zzz","kind":"k"}]})");
  AlignmentResult r = align_candidate("completely-unrelated", g, 0.0);
  CHECK(r.disposition == Disposition::Aligned);
  REQUIRE(r.matched_node_id.has_value());
}

TEST_CASE("align_candidate is a pure function") {
  TypedGraph g = build_typed_graph(
      R"({"nodes":[{"id":"n1","name":"SenderPort","kind":"k"},
                   {"id":"n2","name":"ReceiverPort","kind":"k"}]})");
  AlignmentResult a = align_candidate("sender_port", g, 0.5);
  AlignmentResult b = align_candidate("sender_port", g, 0.5);
  CHECK(a.disposition == b.disposition);
  CHECK(a.score == b.score);
  CHECK(a.matched_node_id == b.matched_node_id);
}

TEST_CASE("name similarity is the normalized levenshtein on canonical forms") {
  CHECK(name_similarity("OperationInvokedEvent", "operation-invoked-event") ==
        doctest::Approx(1.0));
  // canonical: "abcd" vs "abxd" -> distance 1, max len 4 -> 0.75
  CHECK(name_similarity("AbCd", "a-b_x d") == doctest::Approx(0.75));
}

TEST_CASE("merge scales near-linearly (sanity proxy)") {
  // Doubling nodes+hints should not triple wall time. Coarse but catches
  // accidentally quadratic behavior.
  auto synth = [](int graphs, int nodes_per) {
    std::vector<TypedGraph> out;
    for (int gi = 0; gi < graphs; ++gi) {
      json nodes = json::array();
      for (int i = 0; i < nodes_per; ++i) {
        nodes.push_back({{"id", "n" + std::to_string(i)},
                         {"name", "N" + std::to_string(gi) + "_" + std::to_string(i)},
                         {"kind", "k"}});
      }
      json doc = {{"source_id", "g" + std::to_string(gi)}, {"nodes", nodes}};
      out.push_back(build_typed_graph(doc.dump()));
    }
    return out;
  };
  auto hints_for = [](int graphs, int count) {
    std::vector<OverlapHint> hints;
    for (int i = 0; i < count; ++i) {
      hints.push_back({i % (graphs - 1), "n" + std::to_string(i),
                       i % (graphs - 1) + 1, "n" + std::to_string(i)});
    }
    return hints;
  };
  auto time_merge = [&](int graphs, int nodes_per, int hints) {
    auto gs = synth(graphs, nodes_per);
    auto hs = hints_for(graphs, hints);
    // min of 3 runs: scheduling noise only ever inflates a measurement
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      merge_graphs(gs, hs, MergeOptions{.auto_hints = false});
      auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  double small = time_merge(4, 500, 200);
  double large = time_merge(4, 1000, 400);
  CHECK(large < 3.0 * small + 0.05);  // +50ms noise floor for tiny timings
}
