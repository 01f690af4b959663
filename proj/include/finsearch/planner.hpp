#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "finsearch/dates.hpp"
#include "finsearch/graph.hpp"
#include "finsearch/llm.hpp"
#include "finsearch/prompts.hpp"

namespace finsearch {

inline constexpr std::size_t kMaxPlanNodes = 12;

struct QueryContext {
  std::string user_query;
  TimePoint now{};  // the query's reference timestamp
  std::vector<ResolvedDate> resolved_dates;
};

struct PlanDraft {
  std::string raw_llm_text;
  std::optional<SearchGraph> parsed;
  std::vector<Violation> violations;
};

// Populates resolved_dates from the closed relative-date grammar. Purely
// local text scanning: planning stays a single LLM round trip, and entity
// extraction is folded into the planner prompt itself. Dates resolving more
// than seven days past `now` are rejected — the engine answers questions
// about the past and present, not the far future.
inline QueryContext extract_semantics(QueryContext ctx) {
  if (ctx.user_query.empty()) {
    throw Error(errc::precondition, "user query is empty");
  }
  ctx.resolved_dates = scan_date_expressions(ctx.user_query, ctx.now);
  const Date horizon = date_of(ctx.now) + std::chrono::days{7};
  for (const auto& rd : ctx.resolved_dates) {
    if (rd.resolved > horizon) {
      throw Error(errc::unresolvable_date_expr,
                  "'" + rd.surface_form + "' resolves beyond the query horizon");
    }
  }
  return ctx;
}

// Parses LLM plan text into a SearchGraph. Document-shape problems raise
// PlanParseError; cycles and dangling edges surface as PlanInvalid since
// the document was well-formed but names an illegal graph.
inline SearchGraph parse_plan_json(const std::string& text) {
  try {
    return SearchGraph::deserialize(text);
  } catch (const Error& e) {
    switch (e.code()) {
      case errc::cycle_detected:
      case errc::unknown_node:
      case errc::self_loop:
        throw Error(errc::plan_invalid, e.what());
      default:
        throw;
    }
  }
}

namespace detail {

inline std::string resolved_dates_block(const QueryContext& ctx) {
  if (ctx.resolved_dates.empty()) return "(none)";
  std::ostringstream ss;
  for (const auto& rd : ctx.resolved_dates) {
    ss << "- \"" << rd.surface_form << "\" -> " << format_date(rd.resolved) << "\n";
  }
  auto s = ss.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

inline const char* api_catalog() {
  return "- News: date-windowed financial news headlines\n"
         "- WebSearch: general market context from web search\n"
         "- Finance: OHLC price history (query form \"SYMBOL from..to 1d|1m\")";
}

// Structural checks beyond graph invariants: planned nodes need queries and
// an api (the root may stay an anchor), and plans are capped at 12 nodes.
inline void check_plan_nodes(const SearchGraph& g) {
  if (g.nodes().size() > kMaxPlanNodes) {
    throw Error(errc::plan_invalid,
                "plan has " + std::to_string(g.nodes().size()) + " nodes, max " +
                    std::to_string(kMaxPlanNodes));
  }
  if (g.nodes().empty()) {
    throw Error(errc::plan_invalid, "plan has no nodes");
  }
  for (const auto& [id, n] : g.nodes()) {
    if (n.query.empty()) {
      throw Error(errc::plan_invalid, "node " + id + " has an empty query");
    }
    if (id != g.root() && !n.api) {
      throw Error(errc::plan_invalid, "non-root node " + id + " has no api");
    }
    if (n.status != NodeStatus::Pending || n.response || n.weight || n.info_time) {
      throw Error(errc::plan_invalid,
                  "node " + id + " carries execution state at planning time");
    }
  }
}

}  // namespace detail

// One LLM round trip (plus at most one repair round trip quoting the parse
// error) that turns the query context into a validated SearchGraph. The
// returned graph has zero violations, every node Pending with a non-empty
// query, and the root carrying the original user query.
inline SearchGraph build_plan(const QueryContext& ctx, LlmBackend& llm,
                              const PromptLibrary& prompts = {}) {
  const std::string prompt =
      prompts.render(LlmRole::Planner,
                     {{"user_query", ctx.user_query},
                      {"now_iso", format_iso8601(ctx.now)},
                      {"resolved_dates_block", detail::resolved_dates_block(ctx)},
                      {"api_catalog", detail::api_catalog()}});
  std::string text = llm.complete({LlmRole::Planner, prompt, 2048, 0.0});

  SearchGraph graph;
  try {
    graph = parse_plan_json(text);
  } catch (const Error& first) {
    if (first.code() != errc::plan_parse) throw;
    const std::string repair_prompt =
        prompt + "\nYour previous reply could not be parsed (" + first.what() +
        "). Reply again with pure JSON only.";
    text = llm.complete({LlmRole::Planner, repair_prompt, 2048, 0.0});
    graph = parse_plan_json(text);
  }

  detail::check_plan_nodes(graph);
  const auto violations = graph.validate();
  if (!violations.empty()) {
    std::ostringstream ss;
    ss << "plan violates graph invariants:";
    for (const auto& v : violations) ss << " " << to_string(v.kind) << "(" << v.message << ")";
    throw Error(errc::plan_invalid, ss.str());
  }
  graph.node(graph.root()).query = ctx.user_query;
  return graph;
}

}  // namespace finsearch
