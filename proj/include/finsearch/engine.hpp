#pragma once

#include <filesystem>
#include <fstream>

#include "finsearch/executor.hpp"
#include "finsearch/planner.hpp"
#include "finsearch/reporter.hpp"
#include "finsearch/temporal.hpp"

namespace finsearch {

// Non-owning bundle of everything one pipeline run needs.
struct PipelineServices {
  ConnectorSet& connectors;
  LlmBackend& llm;
  const PromptLibrary& prompts;
  TemporalParams temporal;
  int news_window_days = 7;
};

struct PipelineResult {
  SearchGraph graph;  // executed and weight-annotated
  std::vector<WeightedEvidence> items;  // aggregated + deduplicated
  std::vector<ChartSeries> charts;
};

// plan -> execute -> weight -> aggregate/dedup. The common core behind
// `ask` and the benchmark harness.
inline PipelineResult run_pipeline(const std::string& query, TimePoint now,
                                   PipelineServices& svc,
                                   const ExecutionOptions& opts,
                                   EventLog* log = nullptr) {
  QueryContext ctx;
  ctx.user_query = query;
  ctx.now = now;
  ctx = extract_semantics(std::move(ctx));

  SearchGraph graph = build_plan(ctx, svc.llm, svc.prompts);

  RunServices run_svc{svc.connectors, &svc.llm, &svc.prompts, now,
                      svc.news_window_days};
  graph = run(std::move(graph), run_svc, opts, log);

  graph = opts.enable_temporal_weighting
              ? annotate_weights(std::move(graph), now, svc.temporal)
              : annotate_uniform_weights(std::move(graph));

  PipelineResult result;
  result.items = dedup(aggregate(graph));
  result.charts = extract_charts(graph);
  result.graph = std::move(graph);
  return result;
}

struct AskOutcome {
  PipelineResult pipeline;
  Report report;
  std::filesystem::path report_path;
  std::vector<std::string> warnings;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(errc::io, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(errc::io, "short write to " + path.string());
}

}  // namespace detail

// Full `ask` command: pipeline, report generation, and artifact layout
// under out_dir (report.md, charts/<symbol>.json, graph.json,
// events.jsonl). Deterministic byte-for-byte given a fixed `now`, scripted
// LLM, replay fixtures and max_parallel_nodes 1.
inline AskOutcome run_ask(const std::string& query, TimePoint now,
                          PipelineServices& svc, const ExecutionOptions& opts,
                          const std::filesystem::path& out_dir,
                          EventLog* log = nullptr) {
  EventLog local_log;
  if (!log) log = &local_log;

  AskOutcome outcome;
  outcome.pipeline = run_pipeline(query, now, svc, opts, log);
  outcome.report =
      generate_report(query, outcome.pipeline.items, outcome.pipeline.charts,
                      svc.llm, svc.prompts, now, &outcome.warnings);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "charts", ec);
  if (ec) throw Error(errc::io, "cannot create " + (out_dir / "charts").string());

  outcome.report_path = out_dir / "report.md";
  detail::write_file(outcome.report_path, render_report_markdown(outcome.report));
  for (const auto& series : outcome.report.charts) {
    render_kline(series, out_dir / "charts" / (series.symbol + ".json"));
  }
  detail::write_file(out_dir / "graph.json", outcome.pipeline.graph.serialize());
  detail::write_file(out_dir / "events.jsonl", log->to_jsonl());
  return outcome;
}

}  // namespace finsearch
