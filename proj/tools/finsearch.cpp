// finsearch — financial search-agent engine CLI.
//
//   finsearch ask "<query>" --config configs/demo.json --now 2024-10-15T12:00:00Z
//   finsearch plan "<query>" --config configs/demo.json
//   finsearch bench --questions data/questions_20.jsonl --config configs/bench.json
//   finsearch record-fixtures "<query>" --config configs/live.example.json
//
// Exit codes: 0 ok, 2 config, 3 planning, 4 generation, 5 io.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include <finsearch/benchmark.hpp>
#include <finsearch/services.hpp>

namespace {

using namespace finsearch;

constexpr int kExitConfig = 2;
constexpr int kExitPlan = 3;
constexpr int kExitGeneration = 4;
constexpr int kExitIo = 5;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::config:
      return kExitConfig;
    case errc::plan_parse:
    case errc::plan_invalid:
    case errc::unresolvable_date_expr:
      return kExitPlan;
    case errc::generation_empty:
    case errc::script_exhausted:
    case errc::backend_refusal:
    case errc::transport:
      return kExitGeneration;
    case errc::io:
      return kExitIo;
    default:
      return 1;
  }
}

struct GlobalFlags {
  std::string config_path;
  std::string now_iso;
  std::string out_dir;
  std::string fixtures_mode;
  bool no_rewriter = false;
  bool no_temporal = false;
  int max_parallel = 1;
};

void add_global_flags(CLI::App* cmd, GlobalFlags& g) {
  cmd->add_option("--config", g.config_path, "engine config JSON")->required();
  cmd->add_option("--now", g.now_iso,
                  "reference timestamp (ISO-8601 UTC); defaults to wall clock");
  cmd->add_option("--out", g.out_dir, "output directory (overrides config)");
  cmd->add_option("--fixtures-mode", g.fixtures_mode,
                  "record | replay | live (overrides config)");
  cmd->add_flag("--no-rewriter", g.no_rewriter, "disable the query rewriter");
  cmd->add_flag("--no-temporal", g.no_temporal, "disable temporal weighting");
  cmd->add_option("--max-parallel", g.max_parallel,
                  "max nodes executing concurrently")
      ->check(CLI::PositiveNumber);
}

TimePoint resolve_now(const GlobalFlags& g) {
  if (g.now_iso.empty()) {
    return std::chrono::time_point_cast<std::chrono::seconds>(
        std::chrono::system_clock::now());
  }
  auto tp = try_parse_iso8601(g.now_iso);
  if (!tp) throw Error(errc::config, "--now is not ISO-8601 UTC: " + g.now_iso);
  return *tp;
}

EngineConfig load_config(const GlobalFlags& g) {
  auto cfg = EngineConfig::load(g.config_path);
  if (!g.fixtures_mode.empty()) {
    auto m = parse_fixture_mode(g.fixtures_mode);
    if (!m) throw Error(errc::config, "bad --fixtures-mode " + g.fixtures_mode);
    cfg.fixtures_mode = *m;
  }
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  cfg.validate();
  return cfg;
}

ExecutionOptions options_from(const GlobalFlags& g) {
  ExecutionOptions opts;
  opts.enable_rewriter = !g.no_rewriter;
  opts.enable_temporal_weighting = !g.no_temporal;
  opts.max_parallel_nodes = g.max_parallel;
  return opts;
}

int cmd_ask(const GlobalFlags& g, const std::string& query) {
  const auto cfg = load_config(g);
  const auto now = resolve_now(g);
  auto services = make_services(cfg, [now] { return now; });
  auto pipeline = services.pipeline(cfg);
  EventLog log;
  const auto outcome =
      run_ask(query, now, pipeline, options_from(g), cfg.out_dir, &log);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  std::size_t failed = 0;
  for (const auto& [id, n] : outcome.pipeline.graph.nodes()) {
    failed += n.status == NodeStatus::Failed;
  }
  if (failed > 0) {
    std::cerr << "note: " << failed
              << " node(s) failed; the report covers the rest\n";
  }
  std::cout << outcome.report_path.string() << "\n";
  return 0;
}

int cmd_plan(const GlobalFlags& g, const std::string& query) {
  const auto cfg = load_config(g);
  auto services = make_services(cfg);
  QueryContext ctx;
  ctx.user_query = query;
  ctx.now = resolve_now(g);
  ctx = extract_semantics(std::move(ctx));
  const auto graph = build_plan(ctx, *services.llm, services.prompts);
  std::cout << graph.serialize();
  return 0;
}

int cmd_bench(const GlobalFlags& g, const std::string& questions_path,
              const std::string& results_path, int jobs) {
  const auto cfg = load_config(g);
  const auto questions = load_questions(questions_path);
  auto services = make_services(cfg);
  if (services.scripted && jobs != 1) {
    std::cerr << "note: scripted llm backend, forcing --jobs 1\n";
    jobs = 1;
  }
  auto pipeline = services.pipeline(cfg);
  EventLog log;
  const auto result = evaluate(questions, pipeline, options_from(g), &log, jobs);
  std::cout << format_result(result);
  if (!results_path.empty()) {
    detail::write_file(results_path, result.to_json().dump(2) + "\n");
    std::cerr << "results written to " << results_path << "\n";
  }
  return 0;
}

int cmd_record_fixtures(const GlobalFlags& g, const std::string& query) {
  auto cfg = load_config(g);
  if (g.fixtures_mode.empty()) cfg.fixtures_mode = FixtureMode::Record;
  if (cfg.fixtures_mode != FixtureMode::Record) {
    throw Error(errc::config,
                "record-fixtures runs in record mode; got --fixtures-mode " +
                    to_string(cfg.fixtures_mode));
  }
  cfg.validate();
  const auto now = resolve_now(g);
  auto services = make_services(cfg, [now] { return now; }, /*record_llm=*/true);
  auto pipeline = services.pipeline(cfg);
  EventLog log;
  run_ask(query, now, pipeline, options_from(g), cfg.out_dir, &log);

  const auto script_path = cfg.out_dir / "recorded_script.json";
  detail::write_file(script_path, services.recorder->script_json().dump(2) + "\n");
  std::cout << "connector fixtures recorded under " << cfg.fixtures_dir.string()
            << "\n"
            << "llm responses captured at " << script_path.string()
            << " — point llm.script_path there to replay this run\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FinSearch: temporal-aware financial search-agent engine"};
  app.require_subcommand(1);

  GlobalFlags ask_flags, plan_flags, bench_flags, record_flags;
  std::string ask_query, plan_query, record_query;
  std::string questions_path, results_path;
  int jobs = 1;

  auto* ask = app.add_subcommand("ask", "run the full pipeline and write a report");
  ask->add_option("query", ask_query, "user query")->required();
  add_global_flags(ask, ask_flags);

  auto* plan = app.add_subcommand("plan", "print the validated plan JSON without executing");
  plan->add_option("query", plan_query, "user query")->required();
  add_global_flags(plan, plan_flags);

  auto* bench = app.add_subcommand("bench", "score a four-choice question file");
  bench->add_option("--questions", questions_path, "JSONL question file")->required();
  bench->add_option("--jobs", jobs, "parallel questions (live mode only)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--results", results_path,
                    "write full results JSON here (bench's --out is the report dir)");
  add_global_flags(bench, bench_flags);

  auto* record = app.add_subcommand("record-fixtures",
                                    "run live and persist connector payloads");
  record->add_option("query", record_query, "user query")->required();
  add_global_flags(record, record_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ask->parsed()) return cmd_ask(ask_flags, ask_query);
    if (plan->parsed()) return cmd_plan(plan_flags, plan_query);
    if (bench->parsed()) {
      return cmd_bench(bench_flags, questions_path, results_path, jobs);
    }
    if (record->parsed()) return cmd_record_fixtures(record_flags, record_query);
  } catch (const finsearch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
