#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "verigen/common.hpp"

namespace verigen {

struct SourceRef {
  std::string source_id;
  std::string locator;

  friend bool operator==(const SourceRef& a, const SourceRef& b) {
    return a.source_id == b.source_id && a.locator == b.locator;
  }
  friend bool operator<(const SourceRef& a, const SourceRef& b) {
    return std::tie(a.source_id, a.locator) < std::tie(b.source_id, b.locator);
  }
};

struct Entity {
  std::string id;
  std::string name;
  std::string kind;
  std::map<std::string, std::string> attributes;  // name -> value type
};

struct Relation {
  std::string id;
  std::string src;
  std::string dst;
  std::string kind;
  std::optional<std::pair<long, long>> cardinality;  // [min, max]
};

// Provenance-tracked typed entity/relation graph. Immutable once built;
// merge produces a fresh graph.
struct TypedGraph {
  std::vector<Entity> nodes;
  std::vector<Relation> edges;
  std::map<std::string, std::string> sort_of;  // node/edge id -> sort label
  std::map<std::string, std::vector<SourceRef>> provenance;

  const Entity* find_node(const std::string& id) const;
  const Entity* find_node_by_name(const std::string& name) const;
  bool has_kind_name(const std::string& name) const {
    return find_node_by_name(name) != nullptr;
  }
};

// Parses the graph-declaration document (JSON with nodes[], edges[]).
// Every element gets a self-provenance entry.
TypedGraph build_typed_graph(const std::string& declaration_json);

struct OverlapHint {
  int left_graph = 0;
  std::string left_node;
  int right_graph = 0;
  std::string right_node;
};

struct MergeOptions {
  // Union nodes of equal kind whose canonicalized names match exactly, in
  // addition to the explicit hints.
  bool auto_hints = true;
};

struct MergeOutcome {
  TypedGraph graph;
  std::vector<std::string> rejected_hints;  // kind-mismatch etc., logged
  std::size_t unions_performed = 0;
};

MergeOutcome merge_graphs(const std::vector<TypedGraph>& graphs,
                          const std::vector<OverlapHint>& hints,
                          const MergeOptions& options = {});

// Lowercase, non-alphanumerics stripped (camel-case boundaries dissolve
// into the same canonical form).
std::string canonicalize_name(const std::string& name);

// 1 - levenshtein/max-length over canonicalized names.
double name_similarity(const std::string& a, const std::string& b);

enum class Disposition { Aligned, NewNode, Quarantined };

struct AlignmentResult {
  std::string candidate_id;
  std::optional<std::string> matched_node_id;
  double score = 0.0;
  Disposition disposition = Disposition::Quarantined;
};

// Deterministic fuzzy alignment of a named candidate against graph nodes.
// Never throws on a poor match: low score means Quarantined (or NewNode
// when the caller opts in via create_if_unmatched).
AlignmentResult align_candidate(const std::string& candidate_name,
                                const TypedGraph& graph, double theta_link,
                                bool create_if_unmatched = false);

}  // namespace verigen
