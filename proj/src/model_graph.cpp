#include "verigen/model_graph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <json.hpp>

namespace verigen {

using nlohmann::json;

const Entity* TypedGraph::find_node(const std::string& id) const {
  for (const Entity& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Entity* TypedGraph::find_node_by_name(const std::string& name) const {
  for (const Entity& n : nodes) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

TypedGraph build_typed_graph(const std::string& declaration_json) {
  json doc;
  try {
    doc = json::parse(declaration_json);
  } catch (const json::exception& e) {
    throw Error("declaration-invalid", std::string("declaration does not parse: ") + e.what());
  }
  TypedGraph g;
  std::string source_id = doc.value("source_id", std::string("decl"));
  std::set<std::string> ids;

  for (const auto& jn : doc.value("nodes", json::array())) {
    Entity n;
    n.id = jn.at("id").get<std::string>();
    n.name = jn.value("name", n.id);
    n.kind = jn.value("kind", std::string("entity"));
    if (jn.contains("attributes")) {
      for (auto it = jn.at("attributes").begin(); it != jn.at("attributes").end(); ++it) {
        n.attributes[it.key()] = it.value().get<std::string>();
      }
    }
    if (!ids.insert(n.id).second) {
      throw Error("duplicate-id", "node id '" + n.id + "' declared twice");
    }
    g.sort_of[n.id] = n.kind;
    g.provenance[n.id] = {SourceRef{source_id, n.id}};
    g.nodes.push_back(std::move(n));
  }
  int edge_ordinal = 0;
  for (const auto& je : doc.value("edges", json::array())) {
    Relation e;
    e.src = je.at("src").get<std::string>();
    e.dst = je.at("dst").get<std::string>();
    e.kind = je.value("kind", std::string("ref"));
    e.id = je.value("id", e.src + "->" + e.dst + ":" + e.kind);
    if (je.contains("cardinality")) {
      const auto& c = je.at("cardinality");
      e.cardinality = std::make_pair(c.at(0).get<long>(), c.at(1).get<long>());
    }
    if (!ids.insert(e.id).second) {
      throw Error("duplicate-id", "edge id '" + e.id + "' declared twice");
    }
    for (const std::string* endpoint : {&e.src, &e.dst}) {
      bool found = false;
      for (const Entity& n : g.nodes) {
        if (n.id == *endpoint) found = true;
      }
      if (!found) {
        throw Error("dangling-edge-endpoint",
                    "edge '" + e.id + "' references undeclared node '" + *endpoint + "'");
      }
    }
    g.sort_of[e.id] = e.kind;
    g.provenance[e.id] = {SourceRef{source_id, e.id}};
    g.edges.push_back(std::move(e));
    ++edge_ordinal;
  }
  (void)edge_ordinal;
  return g;
}

std::string canonicalize_name(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

namespace {

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t(0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Union-find with path compression and union by size.
class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t(0));
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

double name_similarity(const std::string& a, const std::string& b) {
  std::string ca = canonicalize_name(a);
  std::string cb = canonicalize_name(b);
  std::size_t m = std::max(ca.size(), cb.size());
  if (m == 0) return 1.0;
  return 1.0 - double(levenshtein(ca, cb)) / double(m);
}

MergeOutcome merge_graphs(const std::vector<TypedGraph>& graphs,
                          const std::vector<OverlapHint>& hints,
                          const MergeOptions& options) {
  MergeOutcome out;

  // Flatten nodes; qualified id = g<i>:<id>.
  struct Slot {
    int graph;
    const Entity* node;
    std::string qualified;
  };
  std::vector<Slot> slots;
  std::map<std::pair<int, std::string>, std::size_t> index;
  for (int gi = 0; gi < int(graphs.size()); ++gi) {
    for (const Entity& n : graphs[std::size_t(gi)].nodes) {
      std::string q = "g" + std::to_string(gi) + ":" + n.id;
      index[{gi, n.id}] = slots.size();
      slots.push_back(Slot{gi, &n, std::move(q)});
    }
  }

  DisjointSet ds(slots.size());
  auto try_union = [&](std::size_t a, std::size_t b, const std::string& label) {
    if (slots[a].node->kind != slots[b].node->kind) {
      out.rejected_hints.push_back(label + ": kind mismatch (" +
                                   slots[a].node->kind + " vs " +
                                   slots[b].node->kind + ")");
      return;
    }
    if (ds.unite(a, b)) ++out.unions_performed;
  };

  for (const OverlapHint& h : hints) {
    auto li = index.find({h.left_graph, h.left_node});
    auto ri = index.find({h.right_graph, h.right_node});
    if (li == index.end() || ri == index.end()) {
      out.rejected_hints.push_back("hint (" + h.left_node + ", " + h.right_node +
                                   "): unknown node");
      continue;
    }
    try_union(li->second, ri->second,
              "hint (" + h.left_node + ", " + h.right_node + ")");
  }

  if (options.auto_hints) {
    // Exact-canonical-name matches of equal kind across graphs.
    std::map<std::pair<std::string, std::string>, std::size_t> first_seen;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      auto key = std::make_pair(canonicalize_name(slots[i].node->name),
                                slots[i].node->kind);
      auto it = first_seen.find(key);
      if (it == first_seen.end()) {
        first_seen.emplace(key, i);
      } else if (slots[it->second].graph != slots[i].graph) {
        try_union(it->second, i, "auto (" + slots[i].node->name + ")");
      }
    }
  }

  // Group members per representative; merged identity fields are the
  // lexicographic minima over members, so input order only permutes ids.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    groups[ds.find(i)].push_back(i);
  }

  // Original ids that appear exactly once across all inputs can be kept
  // verbatim; everything else is renamed deterministically.
  std::map<std::string, int> id_uses;
  for (const Slot& s : slots) ++id_uses[s.node->id];

  std::map<std::size_t, std::string> merged_id_of;  // representative -> id
  for (auto& [rep, members] : groups) {
    Entity merged;
    std::string best_q;
    std::set<SourceRef> prov;
    for (std::size_t m : members) {
      const Slot& s = slots[m];
      if (best_q.empty() || s.qualified < best_q) best_q = s.qualified;
      if (merged.name.empty() || s.node->name < merged.name) merged.name = s.node->name;
      merged.kind = s.node->kind;
      for (const auto& [an, at] : s.node->attributes) {
        auto it = merged.attributes.find(an);
        if (it == merged.attributes.end() || at < it->second) {
          merged.attributes[an] = at;
        }
      }
      const auto& g = graphs[std::size_t(s.graph)];
      auto pit = g.provenance.find(s.node->id);
      if (pit != g.provenance.end()) {
        prov.insert(pit->second.begin(), pit->second.end());
      }
    }
    if (members.size() == 1) {
      const std::string& orig = slots[members.front()].node->id;
      merged.id = id_uses[orig] == 1 ? orig : best_q;
    } else {
      merged.id = "m:" + canonicalize_name(merged.name) + ":" + merged.kind;
    }
    // Guard against accidental collisions between merged ids.
    while (out.graph.sort_of.count(merged.id) != 0) merged.id += "+";
    merged_id_of[rep] = merged.id;
    out.graph.sort_of[merged.id] = merged.kind;
    out.graph.provenance[merged.id] =
        std::vector<SourceRef>(prov.begin(), prov.end());
    out.graph.nodes.push_back(std::move(merged));
  }

  // Edges: endpoints remapped to merged ids; parallel edges of equal
  // (src, dst, kind) collapse with provenance union and cardinality
  // intersection when both are present.
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> edge_of;
  for (int gi = 0; gi < int(graphs.size()); ++gi) {
    const TypedGraph& g = graphs[std::size_t(gi)];
    for (const Relation& e : g.edges) {
      std::string src = merged_id_of.at(ds.find(index.at({gi, e.src})));
      std::string dst = merged_id_of.at(ds.find(index.at({gi, e.dst})));
      auto key = std::make_tuple(src, dst, e.kind);
      std::vector<SourceRef> prov;
      auto pit = g.provenance.find(e.id);
      if (pit != g.provenance.end()) prov = pit->second;
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Relation merged = e;
        merged.id = src + "->" + dst + ":" + e.kind;
        merged.src = src;
        merged.dst = dst;
        edge_of[key] = out.graph.edges.size();
        out.graph.sort_of[merged.id] = merged.kind;
        auto& pv = out.graph.provenance[merged.id];
        pv.insert(pv.end(), prov.begin(), prov.end());
        out.graph.edges.push_back(std::move(merged));
      } else {
        Relation& existing = out.graph.edges[it->second];
        if (existing.cardinality && e.cardinality) {
          long lo = std::max(existing.cardinality->first, e.cardinality->first);
          long hi = std::min(existing.cardinality->second, e.cardinality->second);
          if (lo <= hi) existing.cardinality = std::make_pair(lo, hi);
        } else if (e.cardinality) {
          existing.cardinality = e.cardinality;
        }
        auto& pv = out.graph.provenance[existing.id];
        for (const SourceRef& r : prov) {
          if (std::find(pv.begin(), pv.end(), r) == pv.end()) pv.push_back(r);
        }
      }
    }
  }

  // Deterministic ordering regardless of input order.
  std::sort(out.graph.nodes.begin(), out.graph.nodes.end(),
            [](const Entity& a, const Entity& b) { return a.id < b.id; });
  std::sort(out.graph.edges.begin(), out.graph.edges.end(),
            [](const Relation& a, const Relation& b) { return a.id < b.id; });
  for (auto& [id, prov] : out.graph.provenance) {
    std::sort(prov.begin(), prov.end());
    prov.erase(std::unique(prov.begin(), prov.end()), prov.end());
  }
  return out;
}

AlignmentResult align_candidate(const std::string& candidate_name,
                                const TypedGraph& graph, double theta_link,
                                bool create_if_unmatched) {
  if (theta_link < 0.0 || theta_link > 1.0) {
    throw Error("policy-invalid", "theta_link must be in [0, 1]");
  }
  AlignmentResult r;
  r.candidate_id = candidate_name;
  double best = -1.0;
  std::string best_id;
  for (const Entity& n : graph.nodes) {
    double s = name_similarity(candidate_name, n.name);
    if (s > best || (s == best && n.id < best_id)) {
      best = s;
      best_id = n.id;
    }
  }
  if (best >= 0.0 && best >= theta_link) {
    r.matched_node_id = best_id;
    r.score = best;
    r.disposition = Disposition::Aligned;
  } else {
    r.score = best < 0.0 ? 0.0 : best;
    r.disposition = create_if_unmatched ? Disposition::NewNode
                                        : Disposition::Quarantined;
  }
  return r;
}

}  // namespace verigen
