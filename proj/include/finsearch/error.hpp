#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsearch {

// Error taxonomy shared across the engine. Every throwing operation uses
// Error with one of these codes so callers can branch without string matching.
enum class errc {
  // graph
  duplicate_node_id,
  unknown_node,
  self_loop,
  cycle_detected,
  // llm gateway
  script_exhausted,
  script_parse,
  transport,
  backend_refusal,
  // planner
  plan_parse,
  plan_invalid,
  unresolvable_date_expr,
  // connectors
  fixture_miss,
  provider,
  unknown_symbol,
  data_integrity,
  // benchmark
  question_parse,
  no_choice_found,
  // reporter
  generation_empty,
  // generic
  precondition,
  config,
  io,
};

inline std::string_view to_string(errc c) {
  switch (c) {
    case errc::duplicate_node_id: return "DuplicateNodeId";
    case errc::unknown_node: return "UnknownNode";
    case errc::self_loop: return "SelfLoop";
    case errc::cycle_detected: return "CycleDetected";
    case errc::script_exhausted: return "ScriptExhausted";
    case errc::script_parse: return "ScriptParseError";
    case errc::transport: return "TransportError";
    case errc::backend_refusal: return "BackendRefusal";
    case errc::plan_parse: return "PlanParseError";
    case errc::plan_invalid: return "PlanInvalid";
    case errc::unresolvable_date_expr: return "UnresolvableDateExpr";
    case errc::fixture_miss: return "FixtureMiss";
    case errc::provider: return "ProviderError";
    case errc::unknown_symbol: return "UnknownSymbol";
    case errc::data_integrity: return "DataIntegrityError";
    case errc::question_parse: return "QuestionParseError";
    case errc::no_choice_found: return "NoChoiceFound";
    case errc::generation_empty: return "GenerationEmpty";
    case errc::precondition: return "PreconditionError";
    case errc::config: return "ConfigError";
    case errc::io: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace finsearch
