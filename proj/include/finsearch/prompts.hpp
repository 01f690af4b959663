#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "finsearch/error.hpp"
#include "finsearch/llm.hpp"

namespace finsearch {

// Loads the per-role prompt templates (planner.txt, rewriter.txt,
// generator.txt, answerer.txt) from a directory and renders them by
// substituting {name} placeholders. Without a directory the built-in
// defaults below are used, so the engine runs out of the box.
class PromptLibrary {
 public:
  PromptLibrary() = default;

  static PromptLibrary from_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (const auto role : {LlmRole::Planner, LlmRole::Rewriter,
                            LlmRole::Generator, LlmRole::Answerer}) {
      const auto file = dir / (lower(to_string(role)) + ".txt");
      std::ifstream in(file);
      if (!in) {
        throw Error(errc::config, "missing prompt template " + file.string());
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      lib.templates_[role] = ss.str();
    }
    return lib;
  }

  std::string render(LlmRole role,
                     const std::map<std::string, std::string>& values) const {
    auto it = templates_.find(role);
    const std::string& tmpl =
        it != templates_.end() ? it->second : default_template(role);
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
      auto open = tmpl.find('{', pos);
      if (open == std::string::npos) {
        out.append(tmpl, pos, std::string::npos);
        break;
      }
      auto close = tmpl.find('}', open);
      if (close == std::string::npos) {
        out.append(tmpl, pos, std::string::npos);
        break;
      }
      const std::string key = tmpl.substr(open + 1, close - open - 1);
      auto vi = values.find(key);
      if (vi != values.end()) {
        out.append(tmpl, pos, open - pos);
        out.append(vi->second);
        pos = close + 1;
      } else {
        // Not a known placeholder (e.g. JSON braces in the template text).
        out.append(tmpl, pos, open - pos + 1);
        pos = open + 1;
      }
    }
    return out;
  }

  static const std::string& default_template(LlmRole role) {
    static const std::string planner = R"(You are the search pre-planner of a financial research engine.
Current UTC time: {now_iso}
Resolved date references:
{resolved_dates_block}

Available data sources:
{api_catalog}

Decompose the user query into a directed acyclic search graph. Reply with
pure JSON only, no prose and no code fences, in exactly this format:
{"root": "n001",
 "nodes": [{"id": "n001", "query": "<original query>"},
           {"id": "n002", "query": "<sub-query>", "api": "News"}],
 "edges": [["n001", "n002"]]}

Rules: ids are zero-padded like n001 in emission order; the root node
carries the original query and may omit "api"; every other node needs an
"api" of News, WebSearch or Finance; Finance node queries use the form
"<SYMBOL> <from>..<to> <1d|1m>" with ISO dates; at most 12 nodes; do not
emit weight, info_time, response or status fields.

User query: {user_query}
)";
    static const std::string rewriter = R"(You are the adaptive query rewriter of a financial research engine.
A search node just finished; decide whether each still-pending child
sub-query should be refined in light of the new results.

Executed node {executed_id} queried: {executed_query}
Result summary:
{executed_response}

Pending children:
{children_block}

Full search graph:
{graph_json}

Reply with pure JSON {"decisions": [{"child_id": "n003", "action": "keep"}
or {"child_id": "n003", "action": "replace", "query": "<new query>"}]},
one decision per child, or the single word KEEP to leave all unchanged.
)";
    static const std::string generator = R"(You are the response generator of a financial research engine.
Current UTC time: {now_iso}
User query: {user_query}

Evidence, ordered by temporal relevance (weight) — cite with [n]:
{evidence_block}

Available chart data:
{charts_block}

Write a Markdown analysis organized chronologically, emphasizing recent,
highly weighted developments. Cite every claim with its [n] marker. Do not
invent sources or numbers beyond the evidence above.
)";
    static const std::string answerer = R"(You answer a timestamped four-choice financial question using the
gathered evidence. Reference time: {now_iso}

Evidence, ordered by temporal relevance (weight):
{evidence_block}

{question_block}

Reason briefly, then end your reply with the line "ANSWER: <letter>" where
<letter> is one of A, B, C, D.
)";
    switch (role) {
      case LlmRole::Planner: return planner;
      case LlmRole::Rewriter: return rewriter;
      case LlmRole::Generator: return generator;
      case LlmRole::Answerer: return answerer;
    }
    return planner;
  }

 private:
  static std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  std::map<LlmRole, std::string> templates_;
};

}  // namespace finsearch
