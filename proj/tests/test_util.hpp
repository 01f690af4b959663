#pragma once

// Shared helpers for the test suites: graph builders, random DAGs, and a
// deterministic in-memory connector set.

#include <random>
#include <string>
#include <vector>

#include <finsearch/connectors.hpp>
#include <finsearch/graph.hpp>
#include <finsearch/llm.hpp>

namespace fstest {

using namespace finsearch;

inline TimePoint ts(const std::string& iso) { return parse_iso8601(iso); }

inline SearchNode make_node(std::string id, std::optional<ApiKind> api = ApiKind::News,
                            std::string query = "") {
  SearchNode n;
  n.id = std::move(id);
  n.query = query.empty() ? "query for " + n.id : std::move(query);
  n.api = api;
  return n;
}

inline Evidence make_evidence(std::string content, TimePoint retrieved,
                              std::optional<TimePoint> published = std::nullopt,
                              std::string source = "src") {
  Evidence e;
  e.content = std::move(content);
  e.source_name = std::move(source);
  e.source_url = "https://example.test/" + e.source_name;
  e.published_at = published;
  e.retrieved_at = retrieved;
  return e;
}

// Random DAG over ids n01..nNN: node k gets an edge from a random earlier
// node (keeping everything root-reachable), plus optional extra forward
// edges.
inline SearchGraph random_dag(std::mt19937& rng, int max_nodes = 12) {
  std::uniform_int_distribution<int> size_dist(1, max_nodes);
  const int n = size_dist(rng);
  SearchGraph g;
  std::vector<NodeId> ids;
  for (int i = 0; i < n; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "n%02d", i + 1);
    NodeId id = buf;
    const std::optional<ApiKind> api =
        i == 0 ? std::nullopt
               : std::optional<ApiKind>(static_cast<ApiKind>(rng() % 3));
    g.add_node(make_node(id, api));
    if (i > 0) {
      std::uniform_int_distribution<int> parent(0, i - 1);
      g.add_edge(ids[static_cast<std::size_t>(parent(rng))], id);
    }
    ids.push_back(id);
  }
  // A few extra forward edges for diamonds/joins.
  std::uniform_int_distribution<int> extra_dist(0, n);
  for (int k = extra_dist(rng); k > 0 && n > 2; --k) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    g.add_edge(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  }
  return g;
}

// Connector set answering every query from an in-memory script with a
// fixed retrieval clock. Unknown queries yield a single generic item.
class SyntheticConnectors : public ConnectorSet {
 public:
  explicit SyntheticConnectors(TimePoint clock) : clock_(clock) {}

  std::vector<Evidence> fetch_news(const std::string& query, TimeWindow) override {
    return {make_evidence("news about " + query, clock_,
                          clock_ - std::chrono::hours{6}, "newswire")};
  }

  std::vector<Evidence> fetch_web(const std::string& query) override {
    return {make_evidence("web result for " + query, clock_, std::nullopt, "web")};
  }

  std::vector<OhlcBar> fetch_finance(const std::string&, TimeWindow range,
                                     BarInterval) override {
    OhlcBar b;
    b.time = range.from;
    b.open = 10;
    b.high = 12;
    b.low = 9;
    b.close = 11;
    return {b};
  }

 private:
  TimePoint clock_;
};

// LlmBackend answering every rewriter call with KEEP and everything else
// with a fixed string; counts calls per role.
class KeepAllBackend : public LlmBackend {
 public:
  std::string complete(const LlmRequest& request) override {
    std::lock_guard lock(mu_);
    calls_[request.role]++;
    if (request.role == LlmRole::Rewriter) return "KEEP";
    return "ok";
  }

  std::size_t calls(LlmRole role) const {
    std::lock_guard lock(mu_);
    auto it = calls_.find(role);
    return it == calls_.end() ? 0 : it->second;
  }

 private:
  std::map<LlmRole, std::size_t> calls_;
  mutable std::mutex mu_;
};

}  // namespace fstest
