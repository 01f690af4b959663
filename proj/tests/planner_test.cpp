#include <finsearch/planner.hpp>

#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace finsearch;
using fstest::ts;

namespace {

const TimePoint kNow = ts("2024-10-15T12:00:00Z");  // a Tuesday

Date d(const std::string& iso) { return *try_parse_date(iso); }

TEST(ResolveRelativeDate, PaperExampleYesterday) {
  EXPECT_EQ(resolve_relative_date("yesterday", kNow), d("2024-10-14"));
}

TEST(ResolveRelativeDate, LastFridayMatchesCalendarOracle) {
  // Oracle: walk backward day by day until a Friday.
  using namespace std::chrono;
  Date probe = date_of(kNow);
  do {
    probe -= days{1};
  } while (weekday{probe} != Friday);
  EXPECT_EQ(probe, d("2024-10-11"));
  EXPECT_EQ(resolve_relative_date("last Friday", kNow), probe);
}

TEST(ResolveRelativeDate, AbsolutePassthrough) {
  EXPECT_EQ(resolve_relative_date("2024-09-30", kNow), d("2024-09-30"));
}

TEST(ResolveRelativeDate, RemainingGrammar) {
  EXPECT_EQ(resolve_relative_date("today", kNow), d("2024-10-15"));
  EXPECT_EQ(resolve_relative_date("3 days ago", kNow), d("2024-10-12"));
  EXPECT_EQ(resolve_relative_date("1 day ago", kNow), d("2024-10-14"));
  EXPECT_EQ(resolve_relative_date("this week", kNow), d("2024-10-14"));   // Monday
  EXPECT_EQ(resolve_relative_date("last week", kNow), d("2024-10-07"));
  EXPECT_EQ(resolve_relative_date("last month", kNow), d("2024-09-01"));
  EXPECT_EQ(resolve_relative_date("this quarter", kNow), d("2024-10-01"));
  // "last Tuesday" on a Tuesday means one week back, strictly previous.
  EXPECT_EQ(resolve_relative_date("last Tuesday", kNow), d("2024-10-08"));
  // Case and spacing are forgiven.
  EXPECT_EQ(resolve_relative_date("  Last   FRIDAY ", kNow), d("2024-10-11"));
}

TEST(ResolveRelativeDate, YearBoundaries) {
  EXPECT_EQ(resolve_relative_date("last month", ts("2024-01-10T00:00:00Z")),
            d("2023-12-01"));
  EXPECT_EQ(resolve_relative_date("yesterday", ts("2024-01-01T05:00:00Z")),
            d("2023-12-31"));
}

TEST(ResolveRelativeDate, OutsideGrammarIsUnresolvable) {
  for (const auto* expr : {"fortnight ago", "next week", "soonish", ""}) {
    try {
      resolve_relative_date(expr, kNow);
      FAIL() << expr;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), errc::unresolvable_date_expr);
    }
  }
}

TEST(ResolveRelativeDate, NeverResolvesPastToday) {
  // Property over random now values: every form in the grammar resolves to
  // at most date(now).
  const std::vector<std::string> grammar = {
      "today",      "yesterday",  "2 days ago", "17 days ago", "last monday",
      "last friday", "last sunday", "last week", "last month", "this week",
      "this quarter"};
  std::mt19937 rng(31);
  std::uniform_int_distribution<long long> secs(0, 3600LL * 24 * 365 * 10);
  for (int i = 0; i < 300; ++i) {
    const TimePoint now = ts("2018-01-01T00:00:00Z") + std::chrono::seconds{secs(rng)};
    for (const auto& expr : grammar) {
      EXPECT_LE(resolve_relative_date(expr, now), date_of(now))
          << expr << " at " << format_iso8601(now);
    }
  }
}

TEST(ExtractSemantics, FindsRelativeExpressions) {
  QueryContext ctx;
  ctx.user_query = "How did NVDA move after last Friday's CPI print?";
  ctx.now = kNow;
  ctx = extract_semantics(std::move(ctx));
  ASSERT_EQ(ctx.resolved_dates.size(), 1u);
  EXPECT_EQ(ctx.resolved_dates[0].surface_form, "last Friday");
  EXPECT_EQ(ctx.resolved_dates[0].resolved, d("2024-10-11"));
}

TEST(ExtractSemantics, NoTemporalExpression) {
  QueryContext ctx;
  ctx.user_query = "What is the PBoC policy stance?";
  ctx.now = kNow;
  ctx = extract_semantics(std::move(ctx));
  EXPECT_TRUE(ctx.resolved_dates.empty());
}

TEST(ExtractSemantics, AbsoluteDate) {
  QueryContext ctx;
  ctx.user_query = "ACME earnings reaction on 2024-06-03 in context";
  ctx.now = kNow;
  ctx = extract_semantics(std::move(ctx));
  ASSERT_EQ(ctx.resolved_dates.size(), 1u);
  EXPECT_EQ(ctx.resolved_dates[0].surface_form, "2024-06-03");
  EXPECT_EQ(ctx.resolved_dates[0].resolved, d("2024-06-03"));
}

TEST(ExtractSemantics, FarFutureDateRejected) {
  QueryContext ctx;
  ctx.user_query = "What happens on 2031-01-01?";
  ctx.now = kNow;
  EXPECT_THROW(extract_semantics(std::move(ctx)), Error);

  QueryContext empty;
  empty.now = kNow;
  EXPECT_THROW(extract_semantics(std::move(empty)), Error);
}

// ---- plan JSON parsing ----

TEST(ParsePlanJson, MinimalSingleNode) {
  const auto g = parse_plan_json(
      R"({"root":"n001","nodes":[{"id":"n001","query":"q","api":"News"}],"edges":[]})");
  EXPECT_EQ(g.nodes().size(), 1u);
  EXPECT_EQ(g.root(), "n001");
  EXPECT_EQ(g.node("n001").api, ApiKind::News);
  EXPECT_EQ(g.node("n001").status, NodeStatus::Pending);
}

TEST(ParsePlanJson, UnknownApiKind) {
  try {
    parse_plan_json(
        R"({"root":"n001","nodes":[{"id":"n001","query":"q","api":"Weather"}],"edges":[]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_parse);
  }
}

TEST(ParsePlanJson, DuplicateNodeId) {
  try {
    parse_plan_json(
        R"({"root":"a","nodes":[{"id":"a","query":"q"},{"id":"a","query":"r"}],"edges":[]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_parse);
  }
}

TEST(ParsePlanJson, CycleIsPlanInvalid) {
  try {
    parse_plan_json(R"({"root":"a","nodes":[{"id":"a","query":"q","api":"News"},
      {"id":"b","query":"r","api":"News"}],"edges":[["a","b"],["b","a"]]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_invalid);
    EXPECT_NE(std::string(e.what()).find("CycleDetected"), std::string::npos);
  }
}

TEST(ParsePlanJson, UnknownFieldsIgnored) {
  const auto g = parse_plan_json(
      R"({"root":"a","nodes":[{"id":"a","query":"q","api":"News","mood":"bullish"}],
          "edges":[],"comment":"extra"})");
  EXPECT_EQ(g.nodes().size(), 1u);
}

// ---- build_plan against a scripted planner ----

const char* kFourNodePlan = R"({
  "root": "n001",
  "nodes": [
    {"id": "n001", "query": "placeholder"},
    {"id": "n002", "query": "NVDA 2024-10-08..2024-10-15 1d", "api": "Finance"},
    {"id": "n003", "query": "NVDA earnings coverage", "api": "News"},
    {"id": "n004", "query": "semiconductor sector context", "api": "WebSearch"}
  ],
  "edges": [["n001","n002"], ["n001","n003"], ["n003","n004"]]
})";

QueryContext make_ctx(const std::string& q = "How did NVDA react to the CPI print?") {
  QueryContext ctx;
  ctx.user_query = q;
  ctx.now = kNow;
  return extract_semantics(std::move(ctx));
}

TEST(BuildPlan, FixtureDefinedFourNodePlan) {
  ScriptedBackend llm({{LlmRole::Planner, kFourNodePlan}});
  const auto ctx = make_ctx();
  const auto g = build_plan(ctx, llm);
  EXPECT_EQ(g.nodes().size(), 4u);
  EXPECT_EQ(g.edges().size(), 3u);
  EXPECT_TRUE(g.validate().empty());
  // Root carries the original query even if the LLM wrote something else.
  EXPECT_EQ(g.node("n001").query, ctx.user_query);
  EXPECT_FALSE(g.node("n001").api.has_value());
}

TEST(BuildPlan, NotJsonTwiceIsParseError) {
  ScriptedBackend llm({{LlmRole::Planner, "not json"},
                       {LlmRole::Planner, "still not json"}});
  try {
    build_plan(make_ctx(), llm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_parse);
  }
  EXPECT_EQ(llm.consumed(LlmRole::Planner), 2u);  // one repair attempt, no more
}

TEST(BuildPlan, RepairRoundTripRecovers) {
  ScriptedBackend llm({{LlmRole::Planner, "```json garbage"},
                       {LlmRole::Planner, kFourNodePlan}});
  const auto g = build_plan(make_ctx(), llm);
  EXPECT_EQ(g.nodes().size(), 4u);
  EXPECT_EQ(llm.consumed(LlmRole::Planner), 2u);
}

TEST(BuildPlan, CyclicPlanIsInvalidNotRepaired) {
  ScriptedBackend llm({{LlmRole::Planner,
                        R"({"root":"a","nodes":[{"id":"a","query":"q","api":"News"},
      {"id":"b","query":"r","api":"News"}],"edges":[["a","b"],["b","a"]]})"}});
  try {
    build_plan(make_ctx(), llm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_invalid);
    EXPECT_NE(std::string(e.what()).find("CycleDetected"), std::string::npos);
  }
  EXPECT_EQ(llm.consumed(LlmRole::Planner), 1u);
}

TEST(BuildPlan, OversizedPlanRejected) {
  json plan;
  plan["root"] = "n001";
  plan["nodes"] = json::array();
  plan["edges"] = json::array();
  for (int i = 1; i <= 13; ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "n%03d", i);
    plan["nodes"].push_back({{"id", id}, {"query", "q"}, {"api", "News"}});
    if (i > 1) plan["edges"].push_back({"n001", id});
  }
  ScriptedBackend llm({{LlmRole::Planner, plan.dump()}});
  try {
    build_plan(make_ctx(), llm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_invalid);
  }
}

TEST(BuildPlan, NonRootWithoutApiRejected) {
  ScriptedBackend llm({{LlmRole::Planner,
                        R"({"root":"a","nodes":[{"id":"a","query":"q"},
      {"id":"b","query":"r"}],"edges":[["a","b"]]})"}});
  EXPECT_THROW(build_plan(make_ctx(), llm), Error);
}

TEST(BuildPlan, MultiRootPlanRejected) {
  ScriptedBackend llm({{LlmRole::Planner,
                        R"({"root":"a","nodes":[{"id":"a","query":"q","api":"News"},
      {"id":"b","query":"r","api":"News"},{"id":"c","query":"s","api":"News"}],
      "edges":[["a","c"],["b","c"]]})"}});
  try {
    build_plan(make_ctx(), llm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::plan_invalid);
    EXPECT_NE(std::string(e.what()).find("MultipleRoots"), std::string::npos);
  }
}

// Fuzz: corrupting a valid plan either raises a typed error or still yields
// a graph satisfying every invariant; nothing in between.
TEST(BuildPlan, FuzzedPlansNeverYieldInvalidGraphs) {
  std::mt19937 rng(555);
  const std::string base = kFourNodePlan;
  for (int i = 0; i < 300; ++i) {
    std::string mutated = base;
    const int edits = 1 + static_cast<int>(rng() % 6);
    for (int e = 0; e < edits; ++e) {
      const auto pos = rng() % mutated.size();
      switch (rng() % 3) {
        case 0: mutated[pos] = static_cast<char>(' ' + rng() % 94); break;
        case 1: mutated.erase(pos, 1); break;
        default: mutated.insert(pos, 1, static_cast<char>(' ' + rng() % 94)); break;
      }
    }
    ScriptedBackend llm({{LlmRole::Planner, mutated},
                         {LlmRole::Planner, mutated}});
    try {
      const auto g = build_plan(make_ctx(), llm);
      EXPECT_TRUE(g.validate().empty());
      for (const auto& [id, n] : g.nodes()) {
        EXPECT_FALSE(n.query.empty());
        if (id != g.root()) EXPECT_TRUE(n.api.has_value());
      }
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == errc::plan_parse || e.code() == errc::plan_invalid)
          << e.what();
    }
  }
}

}  // namespace
