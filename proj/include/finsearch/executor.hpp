#pragma once

#include <condition_variable>
#include <mutex>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "finsearch/connectors.hpp"
#include "finsearch/events.hpp"
#include "finsearch/graph.hpp"
#include "finsearch/llm.hpp"
#include "finsearch/prompts.hpp"

namespace finsearch {

inline constexpr std::size_t kRewriterSummaryChars = 1500;

// Ablation switches and the parallelism bound. The two flags realize the
// rewriter/temporal rows of the ablation harness.
struct ExecutionOptions {
  bool enable_rewriter = true;
  bool enable_temporal_weighting = true;
  int max_parallel_nodes = 1;

  void check() const {
    if (max_parallel_nodes < 1) {
      throw Error(errc::precondition, "max_parallel_nodes must be >= 1");
    }
  }
};

struct RewriteDecision {
  NodeId child_id;
  bool replace = false;
  std::string new_query;  // non-empty and different from current iff replace
};

// Everything run() needs besides the graph. `llm` may be null when the
// rewriter is disabled; `prompts` null means built-in templates.
struct RunServices {
  ConnectorSet& connectors;
  LlmBackend* llm = nullptr;
  const PromptLibrary* prompts = nullptr;
  TimePoint now{};
  int news_window_days = 7;
};

// Finance sub-queries use the structured form the planner prompt mandates:
//   "<SYMBOL> <from>..<to> [1d|1m]"
// with dates either YYYY-MM-DD or full ISO timestamps. Interval defaults
// to 1d.
struct FinanceQuery {
  std::string symbol;
  TimeWindow range;
  BarInterval interval = BarInterval::Day1;
};

inline std::optional<FinanceQuery> parse_finance_query(const std::string& q) {
  static const std::regex re(
      R"(^\s*([A-Za-z0-9.^-]{1,12})\s+(\S+?)\.\.(\S+?)(?:\s+(1m|1d))?\s*$)");
  std::smatch m;
  if (!std::regex_match(q, m, re)) return std::nullopt;
  FinanceQuery fq;
  fq.symbol = m[1].str();
  auto parse_endpoint = [](const std::string& s) -> std::optional<TimePoint> {
    return try_parse_iso8601(s);
  };
  auto from = parse_endpoint(m[2].str());
  auto to = parse_endpoint(m[3].str());
  if (!from || !to) return std::nullopt;
  fq.range = {*from, *to};
  if (m[4].matched) fq.interval = *parse_bar_interval(m[4].str());
  return fq;
}

// Runs one node's sub-query against its connector. Never throws: failures
// land in node state (status Failed, error recorded) so traversal can
// continue. A node without an api completes vacuously with an empty
// response. info_time picks up the newest published_at, falling back to
// the retrieval time; an empty result set leaves it unset.
inline SearchNode execute_node(SearchNode node, ConnectorSet& connectors,
                               TimePoint now, int news_window_days = 7) {
  try {
    if (!node.api) {
      node.response = std::vector<Evidence>{};
      node.status = NodeStatus::Executed;
      return node;
    }
    std::vector<Evidence> items;
    switch (*node.api) {
      case ApiKind::News: {
        TimeWindow window{now - std::chrono::hours{24 * news_window_days}, now};
        items = connectors.fetch_news(node.query, window);
        break;
      }
      case ApiKind::WebSearch: {
        items = connectors.fetch_web(node.query);
        break;
      }
      case ApiKind::Finance: {
        auto fq = parse_finance_query(node.query);
        if (!fq) {
          throw Error(errc::precondition,
                      "finance query not in '<SYMBOL> <from>..<to> [1d|1m]' form: '" +
                          node.query + "'");
        }
        auto bars = connectors.fetch_finance(fq->symbol, fq->range, fq->interval);
        if (!bars.empty()) {
          json payload;
          payload["symbol"] = fq->symbol;
          payload["interval"] = to_string(fq->interval);
          payload["bars"] = json::array();
          for (const auto& b : bars) payload["bars"].push_back(b.to_json());
          Evidence e;
          e.content = payload.dump();
          e.source_name = "finance:" + fq->symbol;
          e.published_at = bars.back().time;
          e.retrieved_at = std::max(now, bars.back().time);
          items.push_back(std::move(e));
        }
        break;
      }
    }
    for (const auto& item : items) {
      if (item.published_at &&
          (!node.info_time || *item.published_at > *node.info_time)) {
        node.info_time = item.published_at;
      }
    }
    if (!node.info_time && !items.empty()) {
      node.info_time = items.front().retrieved_at;
    }
    node.response = std::move(items);
    node.status = NodeStatus::Executed;
  } catch (const std::exception& e) {
    node.status = NodeStatus::Failed;
    node.response.reset();
    node.error = e.what();
  }
  return node;
}

namespace detail {

inline std::string response_summary(const SearchNode& n) {
  std::string out;
  if (n.status == NodeStatus::Failed) {
    out = "(node failed: " + n.error + ")";
  } else if (!n.response || n.response->empty()) {
    out = "(no results)";
  } else {
    for (const auto& e : *n.response) {
      out += "- ";
      if (!e.source_name.empty()) out += "[" + e.source_name + "] ";
      out += e.content;
      out += "\n";
      if (out.size() >= kRewriterSummaryChars) break;
    }
  }
  if (out.size() > kRewriterSummaryChars) out.resize(kRewriterSummaryChars);
  return out;
}

inline std::vector<RewriteDecision> parse_rewrite_reply(const std::string& text) {
  std::string trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.erase(trimmed.begin());
  }
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.pop_back();
  }
  if (trimmed == "KEEP") return {};
  json j = json::parse(trimmed, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("decisions") ||
      !j.at("decisions").is_array()) {
    throw Error(errc::plan_parse, "rewriter reply is neither KEEP nor decision JSON");
  }
  std::vector<RewriteDecision> out;
  for (const auto& dj : j.at("decisions")) {
    if (!dj.is_object() || !dj.contains("child_id") || !dj.contains("action")) {
      throw Error(errc::plan_parse, "decision missing child_id/action");
    }
    RewriteDecision d;
    d.child_id = dj.at("child_id").get<std::string>();
    const auto action = dj.at("action").get<std::string>();
    if (action == "replace") {
      d.replace = true;
      d.new_query = dj.value("query", "");
    } else if (action != "keep") {
      throw Error(errc::plan_parse, "unknown rewrite action '" + action + "'");
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace detail

// Shows the rewriter LLM the finished node's results plus the full graph
// and applies its per-child decisions. Only the query text of immediate
// Pending successors may change; edges, apis and other nodes never do.
// Any rewriter failure (parse, transport, exhausted script) fails open:
// all children keep their queries, and the incident is logged.
inline void rewrite_children(SearchGraph& graph, const NodeId& executed,
                             LlmBackend& llm, const PromptLibrary& prompts,
                             EventLog* log = nullptr) {
  const auto& done = graph.node(executed);
  if (!done.executed_or_failed()) {
    throw Error(errc::precondition,
                "rewrite_children on unfinished node " + executed);
  }
  std::vector<NodeId> children;
  for (const auto& c : graph.successors(executed)) {
    if (graph.node(c).status == NodeStatus::Pending) children.push_back(c);
  }
  if (children.empty()) return;  // no LLM call at all

  std::string children_block;
  for (const auto& c : children) {
    children_block += "- " + c + ": " + graph.node(c).query + "\n";
  }
  const std::string graph_json = graph.to_json().dump(
      -1, ' ', false, nlohmann::json::error_handler_t::replace);
  const std::string prompt = prompts.render(
      LlmRole::Rewriter, {{"executed_id", executed},
                          {"executed_query", done.query},
                          {"executed_response", detail::response_summary(done)},
                          {"children_block", children_block},
                          {"graph_json", graph_json}});
  if (log) {
    log->emit("rewriter_call", executed, {{"children", children}});
  }

  std::vector<RewriteDecision> decisions;
  bool fail_open = false;
  try {
    decisions = detail::parse_rewrite_reply(llm.complete({LlmRole::Rewriter, prompt, 1024, 0.0}));
  } catch (const Error& e) {
    fail_open = true;
    if (log) log->emit("rewriter_error", executed, {{"error", e.what()}});
  }

  std::set<NodeId> replaced;
  if (!fail_open) {
    for (const auto& d : decisions) {
      const bool known = std::find(children.begin(), children.end(),
                                   d.child_id) != children.end();
      if (!known) {
        if (log) {
          log->emit("rewrite_skipped", d.child_id,
                    {{"by", executed}, {"reason", "not a pending child"}});
        }
        continue;
      }
      auto& child = graph.node(d.child_id);
      if (d.replace && !d.new_query.empty() && d.new_query != child.query) {
        if (log) {
          log->emit("rewrite", d.child_id,
                    {{"by", executed},
                     {"action", "replace"},
                     {"old_query", child.query},
                     {"new_query", d.new_query}});
        }
        child.query = d.new_query;
        replaced.insert(d.child_id);
      }
    }
  }
  if (log) {
    for (const auto& c : children) {
      if (!replaced.count(c)) {
        log->emit("rewrite", c, {{"by", executed}, {"action", "keep"}});
      }
    }
  }
}

namespace detail {

// Shared bookkeeping for both execution paths: apply the executed node,
// log it, then let the rewriter touch its pending children before any of
// them can become ready.
inline void finish_node(SearchGraph& graph, SearchNode result,
                        const RunServices& svc, const ExecutionOptions& opts,
                        EventLog* log) {
  const NodeId id = result.id;
  graph.node(id) = std::move(result);
  if (log) {
    const auto& n = graph.node(id);
    json detail{{"status", to_string(n.status)}};
    if (n.response) detail["items"] = n.response->size();
    if (!n.error.empty()) detail["error"] = n.error;
    log->emit("node_finish", id, std::move(detail));
  }
  if (opts.enable_rewriter) {
    if (!svc.llm) {
      throw Error(errc::precondition, "rewriter enabled but no LLM backend");
    }
    static const PromptLibrary default_prompts;
    rewrite_children(graph, id, *svc.llm,
                     svc.prompts ? *svc.prompts : default_prompts, log);
  }
}

}  // namespace detail

// Traverses the graph, executing every node exactly once in dependency
// order. With max_parallel_nodes == 1 the order is exactly
// topological_order(); with more, nodes in the ready set overlap but a
// finished node's rewrites always complete before its successors start.
// Never throws for per-node failures; the returned graph is complete
// (every node Executed or Failed).
inline SearchGraph run(SearchGraph graph, const RunServices& svc,
                       const ExecutionOptions& opts, EventLog* log = nullptr) {
  opts.check();
  if (opts.enable_rewriter && !svc.llm) {
    throw Error(errc::precondition, "rewriter enabled but no LLM backend");
  }
  if (auto v = graph.validate(); !v.empty()) {
    throw Error(errc::precondition, "run() on invalid graph: " + v.front().message);
  }
  for (const auto& [id, n] : graph.nodes()) {
    if (n.status != NodeStatus::Pending) {
      throw Error(errc::precondition, "run() needs all nodes Pending; " + id +
                                          " is " + to_string(n.status));
    }
  }
  if (log) log->emit("run_start", graph.root(), {{"nodes", graph.nodes().size()}});

  if (opts.max_parallel_nodes == 1) {
    for (;;) {
      const auto ready = graph.ready_set();
      if (ready.empty()) break;
      const NodeId id = ready.front();
      if (log) log->emit("node_start", id);
      auto result = execute_node(graph.node(id), svc.connectors, svc.now,
                                 svc.news_window_days);
      detail::finish_node(graph, std::move(result), svc, opts, log);
    }
  } else {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t running = 0;
    std::set<NodeId> inflight;
    std::vector<std::thread> workers;
    std::size_t pending = graph.nodes().size();

    // Must be declared before use inside the worker lambda.
    std::function<void(std::unique_lock<std::mutex>&)> admit =
        [&](std::unique_lock<std::mutex>&) {
          for (const auto& id : graph.ready_set()) {
            if (running >= static_cast<std::size_t>(opts.max_parallel_nodes)) break;
            if (inflight.count(id)) continue;
            inflight.insert(id);
            ++running;
            if (log) log->emit("node_start", id);
            SearchNode snapshot = graph.node(id);
            workers.emplace_back([&, snapshot = std::move(snapshot)]() mutable {
              auto result = execute_node(std::move(snapshot), svc.connectors,
                                         svc.now, svc.news_window_days);
              const NodeId done_id = result.id;
              std::unique_lock<std::mutex> lock(mu);
              detail::finish_node(graph, std::move(result), svc, opts, log);
              inflight.erase(done_id);
              --running;
              --pending;
              admit(lock);
              cv.notify_all();
            });
          }
        };

    {
      std::unique_lock<std::mutex> lock(mu);
      admit(lock);
      cv.wait(lock, [&] { return pending == 0 && running == 0; });
    }
    for (auto& t : workers) {
      if (t.joinable()) t.join();
    }
  }

  if (log) log->emit("run_finish", graph.root());
  return graph;
}

}  // namespace finsearch
