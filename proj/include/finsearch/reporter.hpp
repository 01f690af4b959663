#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finsearch/graph.hpp"
#include "finsearch/llm.hpp"
#include "finsearch/prompts.hpp"

namespace finsearch {

struct WeightedEvidence {
  Evidence evidence;
  double weight = 0.0;
  NodeId origin_node;
  int citation_index = 0;  // unique and contiguous from 1 within a report
};

struct SourceRef {
  int index = 0;
  std::string source_name;
  std::string source_url;
  std::optional<TimePoint> published_at;
};

struct ChartSeries {
  std::string symbol;
  std::vector<OhlcBar> bars;  // nonempty, ascending in time
  std::string title;
};

// Synthesized answer: Markdown narrative with [n] citation markers, the
// cited sources, and any k-line chart series gathered along the way.
struct Report {
  std::string narrative;
  std::vector<SourceRef> sources;
  std::vector<ChartSeries> charts;
  TimePoint generated_at{};
};

// Flattens all evidence in the executed, weight-annotated graph into a
// single deterministic order: weight descending, then origin node id, then
// the item's position within its node. Zero-weight items stay at the tail —
// stale context remains available, just deprioritized.
inline std::vector<WeightedEvidence> aggregate(const SearchGraph& graph) {
  std::vector<WeightedEvidence> out;
  for (const auto& [id, n] : graph.nodes()) {
    if (!n.response) continue;
    for (const auto& item : *n.response) {
      WeightedEvidence we;
      we.evidence = item;
      we.weight = item.weight.value_or(n.weight.value_or(0.0));
      we.origin_node = id;
      out.push_back(std::move(we));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const WeightedEvidence& a, const WeightedEvidence& b) {
                     if (a.weight != b.weight) return a.weight > b.weight;
                     return a.origin_node < b.origin_node;
                   });
  int index = 1;
  for (auto& we : out) we.citation_index = index++;
  return out;
}

namespace detail {

inline std::string normalized_content(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (std::isspace(u) || std::ispunct(u)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace detail

// Collapses items whose normalized content (case-folded, punctuation
// stripped, whitespace collapsed) is identical, keeping the highest-weight
// instance at the first-seen position. Citation indexes are reassigned
// contiguously. Idempotent.
inline std::vector<WeightedEvidence> dedup(const std::vector<WeightedEvidence>& items) {
  std::map<std::string, std::size_t> first_pos;  // normalized -> index into out
  std::vector<WeightedEvidence> out;
  for (const auto& we : items) {
    const auto key = detail::normalized_content(we.evidence.content);
    auto it = first_pos.find(key);
    if (it == first_pos.end()) {
      first_pos.emplace(key, out.size());
      out.push_back(we);
    } else if (we.weight > out[it->second].weight) {
      out[it->second] = we;
    }
  }
  int index = 1;
  for (auto& we : out) we.citation_index = index++;
  return out;
}

// Pulls chart series out of executed Finance nodes (their single evidence
// item carries the bar payload).
inline std::vector<ChartSeries> extract_charts(const SearchGraph& graph) {
  std::vector<ChartSeries> out;
  for (const auto& [id, n] : graph.nodes()) {
    if (n.api != ApiKind::Finance || !n.response) continue;
    for (const auto& item : *n.response) {
      json payload = json::parse(item.content, nullptr, false);
      if (payload.is_discarded() || !payload.contains("bars")) continue;
      ChartSeries series;
      series.symbol = payload.value("symbol", "");
      for (const auto& bj : payload.at("bars")) {
        series.bars.push_back(OhlcBar::from_json(bj));
      }
      if (series.bars.empty() || series.symbol.empty()) continue;
      series.title = series.symbol + " " + payload.value("interval", "1d") +
                     " candlesticks";
      out.push_back(std::move(series));
    }
  }
  return out;
}

namespace detail {

inline std::string evidence_block(const std::vector<WeightedEvidence>& items) {
  std::ostringstream ss;
  for (const auto& we : items) {
    ss << "[" << we.citation_index << "] (weight " << we.weight << ", node "
       << we.origin_node;
    if (we.evidence.published_at) {
      ss << ", published " << format_iso8601(*we.evidence.published_at);
    }
    ss << ") ";
    if (!we.evidence.source_name.empty()) ss << we.evidence.source_name << ": ";
    ss << we.evidence.content << "\n";
  }
  return ss.str();
}

// Keeps only [n] markers that reference a known citation index; anything
// else is stripped from the narrative.
inline std::string strip_unknown_markers(const std::string& narrative,
                                         const std::set<int>& known,
                                         std::vector<std::string>* warnings) {
  static const std::regex marker_re(R"(\[(\d+)\])");
  std::string out;
  out.reserve(narrative.size());
  auto begin = std::sregex_iterator(narrative.begin(), narrative.end(), marker_re);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator{}; ++it) {
    const int idx = std::stoi((*it)[1].str());
    if (!known.count(idx)) {
      out.append(narrative, last, static_cast<std::size_t>(it->position()) - last);
      last = static_cast<std::size_t>(it->position() + it->length());
      if (warnings) {
        warnings->push_back("stripped citation [" + std::to_string(idx) +
                            "] with no matching source");
      }
    }
  }
  out.append(narrative, last, std::string::npos);
  return out;
}

}  // namespace detail

// Drives the generator LLM over the deduplicated evidence and validates
// the citation protocol: every inline [n] must reference a source, and
// uncited sources are dropped from the source list. With no evidence at
// all, a fixed no-information report is produced without an LLM call.
inline Report generate_report(const std::string& query,
                              const std::vector<WeightedEvidence>& items,
                              std::vector<ChartSeries> charts, LlmBackend& llm,
                              const PromptLibrary& prompts, TimePoint now,
                              std::vector<std::string>* warnings = nullptr) {
  Report report;
  report.generated_at = now;
  report.charts = std::move(charts);
  if (items.empty()) {
    report.narrative =
        "No timely information was found for this query; no sources are cited.";
    return report;
  }

  std::string charts_block = "(none)";
  if (!report.charts.empty()) {
    charts_block.clear();
    for (const auto& c : report.charts) {
      charts_block += "- " + c.title + " (" + std::to_string(c.bars.size()) +
                      " bars)\n";
    }
  }
  const std::string prompt = prompts.render(
      LlmRole::Generator, {{"user_query", query},
                           {"now_iso", format_iso8601(now)},
                           {"evidence_block", detail::evidence_block(items)},
                           {"charts_block", charts_block}});

  std::string narrative = llm.complete({LlmRole::Generator, prompt, 4096, 0.0});
  if (narrative.find_first_not_of(" \t\r\n") == std::string::npos) {
    narrative = llm.complete({LlmRole::Generator, prompt, 4096, 0.0});
    if (narrative.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error(errc::generation_empty, "generator returned blank text twice");
    }
  }

  std::set<int> known;
  for (const auto& we : items) known.insert(we.citation_index);
  narrative = detail::strip_unknown_markers(narrative, known, warnings);

  // Sources = cited items only, ordered by index.
  static const std::regex marker_re(R"(\[(\d+)\])");
  std::set<int> cited;
  for (auto it = std::sregex_iterator(narrative.begin(), narrative.end(), marker_re);
       it != std::sregex_iterator{}; ++it) {
    cited.insert(std::stoi((*it)[1].str()));
  }
  for (const auto& we : items) {
    if (!cited.count(we.citation_index)) continue;
    report.sources.push_back({we.citation_index, we.evidence.source_name,
                              we.evidence.source_url, we.evidence.published_at});
  }
  report.narrative = std::move(narrative);
  return report;
}

// Chart-data sidecar consumable by any candlestick front end. Bit-exact
// for identical input.
inline void render_kline(const ChartSeries& series, const std::filesystem::path& path) {
  if (series.bars.empty()) {
    throw Error(errc::precondition, "chart series has no bars");
  }
  for (std::size_t i = 0; i < series.bars.size(); ++i) {
    series.bars[i].check();
    if (i > 0 && series.bars[i - 1].time >= series.bars[i].time) {
      throw Error(errc::precondition, "chart bars must ascend in time");
    }
  }
  json j;
  j["symbol"] = series.symbol;
  j["title"] = series.title;
  j["bars"] = json::array();
  for (const auto& b : series.bars) j["bars"].push_back(b.to_json());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(errc::io, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out.flush()) throw Error(errc::io, "short write to " + path.string());
}

// Final Markdown document: narrative, then a Sources section, then chart
// pointers when present.
inline std::string render_report_markdown(const Report& report) {
  std::ostringstream ss;
  ss << report.narrative;
  if (!report.narrative.empty() && report.narrative.back() != '\n') ss << "\n";
  ss << "\n## Sources\n";
  if (report.sources.empty()) {
    ss << "(none)\n";
  } else {
    for (const auto& s : report.sources) {
      ss << s.index << ". " << (s.source_name.empty() ? "(unnamed)" : s.source_name);
      if (!s.source_url.empty()) ss << " — " << s.source_url;
      if (s.published_at) ss << " (published " << format_iso8601(*s.published_at) << ")";
      ss << "\n";
    }
  }
  if (!report.charts.empty()) {
    ss << "\n## Charts\n";
    for (const auto& c : report.charts) {
      ss << "- " << c.title << ": charts/" << c.symbol << ".json\n";
    }
  }
  ss << "\nGenerated at " << format_iso8601(report.generated_at) << "\n";
  return ss.str();
}

}  // namespace finsearch
