#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "finsearch/types.hpp"

namespace finsearch {

using NodeId = std::string;

enum class NodeStatus { Pending, Executed, Failed };

inline std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Pending: return "Pending";
    case NodeStatus::Executed: return "Executed";
    case NodeStatus::Failed: return "Failed";
  }
  return "Pending";
}

inline std::optional<NodeStatus> parse_node_status(const std::string& s) {
  if (s == "Pending") return NodeStatus::Pending;
  if (s == "Executed") return NodeStatus::Executed;
  if (s == "Failed") return NodeStatus::Failed;
  return std::nullopt;
}

// One sub-query in the search graph. A node without an ApiKind is a
// structural anchor (typically the root holding the original query); the
// executor completes it vacuously with an empty response.
struct SearchNode {
  NodeId id;
  std::string query;
  std::optional<ApiKind> api;
  std::optional<double> weight;
  std::optional<TimePoint> info_time;
  std::optional<std::vector<Evidence>> response;
  NodeStatus status = NodeStatus::Pending;
  std::string error;  // diagnostic, set when status == Failed

  bool executed_or_failed() const { return status != NodeStatus::Pending; }

  void check() const {
    if (id.empty()) throw Error(errc::precondition, "node id is empty");
    if ((status == NodeStatus::Executed) != response.has_value()) {
      throw Error(errc::precondition,
                  "node " + id + ": status Executed iff response set");
    }
    if (weight && *weight < 0) {
      throw Error(errc::precondition, "node " + id + ": negative weight");
    }
  }
};

enum class ViolationKind {
  UnknownRoot,
  RootHasParent,
  MultipleRoots,
  UnreachableNode,
  CycleDetected,
};

struct Violation {
  ViolationKind kind;
  NodeId node;  // offending node where applicable
  std::string message;
};

inline std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::UnknownRoot: return "UnknownRoot";
    case ViolationKind::RootHasParent: return "RootHasParent";
    case ViolationKind::MultipleRoots: return "MultipleRoots";
    case ViolationKind::UnreachableNode: return "UnreachableNode";
    case ViolationKind::CycleDetected: return "CycleDetected";
  }
  return "UnknownViolation";
}

// Directed acyclic graph of sub-queries. Mutations enforce acyclicity and
// endpoint existence; failed mutations leave the graph untouched. Value
// semantics throughout: copy freely, move across threads.
class SearchGraph {
 public:
  using Edge = std::pair<NodeId, NodeId>;

  SearchGraph() = default;

  const std::map<NodeId, SearchNode>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  const NodeId& root() const { return root_; }
  void set_root(NodeId id) { root_ = std::move(id); }

  bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

  const SearchNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(errc::unknown_node, id);
    return it->second;
  }

  SearchNode& node(const NodeId& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(errc::unknown_node, id);
    return it->second;
  }

  void add_node(SearchNode n) {
    n.check();
    if (nodes_.count(n.id)) {
      throw Error(errc::duplicate_node_id, n.id);
    }
    if (nodes_.empty() && root_.empty()) root_ = n.id;
    nodes_.emplace(n.id, std::move(n));
  }

  // Duplicate edges are a no-op; an edge that would close a cycle is
  // rejected with the graph left bit-identical.
  void add_edge(const NodeId& from, const NodeId& to) {
    if (!contains(from)) throw Error(errc::unknown_node, from);
    if (!contains(to)) throw Error(errc::unknown_node, to);
    if (from == to) throw Error(errc::self_loop, from);
    if (edges_.count({from, to})) return;
    if (reachable(to, from)) {
      throw Error(errc::cycle_detected, from + " -> " + to);
    }
    edges_.emplace(from, to);
  }

  std::vector<NodeId> successors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& [u, v] : edges_) {
      if (u == id) out.push_back(v);
    }
    return out;  // sorted: edges_ is ordered by (from, to)
  }

  std::vector<NodeId> predecessors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& [u, v] : edges_) {
      if (v == id) out.push_back(u);
    }
    return out;
  }

  std::size_t in_degree(const NodeId& id) const {
    std::size_t n = 0;
    for (const auto& e : edges_) n += (e.second == id);
    return n;
  }

  std::size_t out_degree(const NodeId& id) const {
    std::size_t n = 0;
    for (const auto& e : edges_) n += (e.first == id);
    return n;
  }

  // Structural invariant check. Violations are data, not failures: an empty
  // list means acyclic, single reachable root, no strays.
  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    if (nodes_.empty()) return out;
    if (!contains(root_)) {
      out.push_back({ViolationKind::UnknownRoot, root_,
                     "root '" + root_ + "' is not a node"});
      return out;
    }
    if (in_degree(root_) != 0) {
      out.push_back({ViolationKind::RootHasParent, root_,
                     "root '" + root_ + "' has an incoming edge"});
    }
    if (is_cyclic()) {
      out.push_back({ViolationKind::CycleDetected, "", "edge relation is cyclic"});
    }
    const auto seen = reachable_from(root_);
    for (const auto& [id, n] : nodes_) {
      if (id == root_) continue;
      if (in_degree(id) == 0 && out_degree(id) > 0) {
        out.push_back({ViolationKind::MultipleRoots, id,
                       "node '" + id + "' is a second parentless root"});
      } else if (!seen.count(id)) {
        out.push_back({ViolationKind::UnreachableNode, id,
                       "node '" + id + "' is not reachable from the root"});
      }
    }
    return out;
  }

  // Pending nodes whose predecessors have all finished (Executed or Failed;
  // failed parents do not block descendants). Ascending id order.
  std::vector<NodeId> ready_set() const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_) {
      if (n.status != NodeStatus::Pending) continue;
      bool ready = true;
      for (const auto& p : predecessors(id)) {
        if (!node(p).executed_or_failed()) {
          ready = false;
          break;
        }
      }
      if (ready) out.push_back(id);
    }
    return out;  // map iteration is already ascending by id
  }

  // Unique topological order: among available nodes always pick the least
  // id, which yields the lexicographically smallest order.
  std::vector<NodeId> topological_order() const {
    std::map<NodeId, std::size_t> indeg;
    for (const auto& [id, n] : nodes_) indeg[id] = 0;
    for (const auto& [u, v] : edges_) indeg[v]++;
    std::set<NodeId> avail;
    for (const auto& [id, d] : indeg) {
      if (d == 0) avail.insert(id);
    }
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    while (!avail.empty()) {
      NodeId u = *avail.begin();
      avail.erase(avail.begin());
      out.push_back(u);
      for (const auto& v : successors(u)) {
        if (--indeg[v] == 0) avail.insert(v);
      }
    }
    if (out.size() != nodes_.size()) {
      throw Error(errc::cycle_detected, "topological_order on cyclic graph");
    }
    return out;
  }

  json to_json() const {
    json j;
    j["root"] = root_;
    j["nodes"] = json::array();
    for (const auto& [id, n] : nodes_) {
      json nj;
      nj["id"] = n.id;
      nj["query"] = n.query;
      if (n.api) nj["api"] = to_string(*n.api);
      if (n.weight) nj["weight"] = *n.weight;
      if (n.info_time) nj["info_time"] = format_iso8601(*n.info_time);
      nj["status"] = to_string(n.status);
      if (n.response) {
        json resp = json::array();
        for (const auto& e : *n.response) resp.push_back(e.to_json());
        nj["response"] = std::move(resp);
      }
      if (!n.error.empty()) nj["error"] = n.error;
      j["nodes"].push_back(std::move(nj));
    }
    j["edges"] = json::array();
    for (const auto& [u, v] : edges_) j["edges"].push_back(json::array({u, v}));
    return j;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  // Parses the interchange/replay document. Shape problems (missing fields,
  // unknown enum values, duplicate ids) raise plan_parse with the offending
  // path; graph-level problems (cycles, dangling edges) propagate from the
  // mutation ops. Unknown fields are ignored.
  static SearchGraph from_json(const json& j) {
    SearchGraph g;
    if (!j.is_object()) throw Error(errc::plan_parse, "document is not an object");
    if (!j.contains("root") || !j.at("root").is_string()) {
      throw Error(errc::plan_parse, "missing string field 'root'");
    }
    if (!j.contains("nodes") || !j.at("nodes").is_array()) {
      throw Error(errc::plan_parse, "missing array field 'nodes'");
    }
    std::size_t idx = 0;
    for (const auto& nj : j.at("nodes")) {
      const std::string path = "nodes[" + std::to_string(idx++) + "]";
      if (!nj.is_object() || !nj.contains("id") || !nj.at("id").is_string()) {
        throw Error(errc::plan_parse, path + ": missing string field 'id'");
      }
      SearchNode n;
      n.id = nj.at("id").get<std::string>();
      if (nj.contains("query")) {
        if (!nj.at("query").is_string()) {
          throw Error(errc::plan_parse, path + ".query: not a string");
        }
        n.query = nj.at("query").get<std::string>();
      }
      if (nj.contains("api")) {
        if (!nj.at("api").is_string()) {
          throw Error(errc::plan_parse, path + ".api: not a string");
        }
        const auto s = nj.at("api").get<std::string>();
        n.api = parse_api_kind(s);
        if (!n.api) {
          throw Error(errc::plan_parse, path + ".api: unknown ApiKind '" + s + "'");
        }
      }
      if (nj.contains("weight")) {
        if (!nj.at("weight").is_number()) {
          throw Error(errc::plan_parse, path + ".weight: not a number");
        }
        n.weight = nj.at("weight").get<double>();
        if (*n.weight < 0) {
          throw Error(errc::plan_parse, path + ".weight: negative");
        }
      }
      if (nj.contains("info_time")) {
        auto tp = try_parse_iso8601(nj.at("info_time").is_string()
                                        ? nj.at("info_time").get<std::string>()
                                        : std::string{});
        if (!tp) throw Error(errc::plan_parse, path + ".info_time: bad timestamp");
        n.info_time = *tp;
      }
      if (nj.contains("status")) {
        if (!nj.at("status").is_string()) {
          throw Error(errc::plan_parse, path + ".status: not a string");
        }
        const auto s = nj.at("status").get<std::string>();
        auto st = parse_node_status(s);
        if (!st) throw Error(errc::plan_parse, path + ".status: unknown status '" + s + "'");
        n.status = *st;
      }
      if (nj.contains("response")) {
        if (!nj.at("response").is_array()) {
          throw Error(errc::plan_parse, path + ".response: not an array");
        }
        std::vector<Evidence> resp;
        for (const auto& ej : nj.at("response")) {
          try {
            resp.push_back(Evidence::from_json(ej));
          } catch (const json::exception& ex) {
            throw Error(errc::plan_parse, path + ".response: " + ex.what());
          }
        }
        n.response = std::move(resp);
      }
      if (nj.contains("error") && nj.at("error").is_string()) {
        n.error = nj.at("error").get<std::string>();
      }
      if (g.contains(n.id)) {
        throw Error(errc::plan_parse, path + ": duplicate node id '" + n.id + "'");
      }
      try {
        g.add_node(std::move(n));
      } catch (const Error& ex) {
        throw Error(errc::plan_parse, path + ": " + ex.what());
      }
    }
    g.set_root(j.at("root").get<std::string>());
    if (j.contains("edges")) {
      if (!j.at("edges").is_array()) {
        throw Error(errc::plan_parse, "'edges' is not an array");
      }
      idx = 0;
      for (const auto& ej : j.at("edges")) {
        const std::string path = "edges[" + std::to_string(idx++) + "]";
        if (!ej.is_array() || ej.size() != 2 || !ej[0].is_string() ||
            !ej[1].is_string()) {
          throw Error(errc::plan_parse, path + ": expected [from, to]");
        }
        g.add_edge(ej[0].get<std::string>(), ej[1].get<std::string>());
      }
    }
    return g;
  }

  static SearchGraph deserialize(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(errc::plan_parse, "not valid JSON");
    return from_json(j);
  }

 private:
  bool reachable(const NodeId& from, const NodeId& target) const {
    if (from == target) return true;
    std::set<NodeId> seen{from};
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
      NodeId u = std::move(stack.back());
      stack.pop_back();
      for (const auto& v : successors(u)) {
        if (v == target) return true;
        if (seen.insert(v).second) stack.push_back(v);
      }
    }
    return false;
  }

  std::set<NodeId> reachable_from(const NodeId& start) const {
    std::set<NodeId> seen{start};
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
      NodeId u = std::move(stack.back());
      stack.pop_back();
      for (const auto& v : successors(u)) {
        if (seen.insert(v).second) stack.push_back(v);
      }
    }
    return seen;
  }

  bool is_cyclic() const {
    try {
      (void)topological_order();
      return false;
    } catch (const Error&) {
      return true;
    }
  }

  std::map<NodeId, SearchNode> nodes_;
  std::set<Edge> edges_;
  NodeId root_;
};

}  // namespace finsearch
