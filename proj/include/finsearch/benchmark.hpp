#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "finsearch/engine.hpp"

namespace finsearch {

inline const std::array<std::string, 4> kQuestionCategories = {
    "stock_market", "rate_changes", "monetary_policy", "industry_developments"};

// One timestamped four-choice item. The timestamp becomes the pipeline's
// reference time so fixtures recorded around the question's era replay
// with the right temporal weights.
struct BenchmarkQuestion {
  std::string id;
  TimePoint timestamp{};
  std::string stem;
  std::map<char, std::string> choices;  // exactly A..D
  char answer_key = 'A';
  std::string category;
};

struct QuestionRecord {
  std::string id;
  char chosen = 0;  // 0 when unparsed/errored
  bool correct = false;
  bool unparsed = false;
  double seconds = 0.0;
  std::string error;
};

struct CategoryStats {
  std::size_t n = 0;
  std::size_t correct = 0;
};

struct BenchmarkResult {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t unparsed = 0;
  double accuracy_pct = 0.0;
  double std_pct = 0.0;        // binomial standard error of the proportion
  double mean_seconds = 0.0;
  double std_seconds = 0.0;    // standard error of the mean time
  std::map<std::string, CategoryStats> per_category;
  ExecutionOptions options_used;
  std::vector<QuestionRecord> records;

  json to_json() const {
    json j;
    j["n"] = n;
    j["correct"] = correct;
    j["unparsed"] = unparsed;
    j["accuracy_pct"] = accuracy_pct;
    j["std_pct"] = std_pct;
    j["mean_seconds"] = mean_seconds;
    j["std_seconds"] = std_seconds;
    j["options"] = {{"rewriter", options_used.enable_rewriter},
                    {"temporal", options_used.enable_temporal_weighting},
                    {"max_parallel", options_used.max_parallel_nodes}};
    j["per_category"] = json::object();
    for (const auto& [cat, st] : per_category) {
      j["per_category"][cat] = {{"n", st.n}, {"correct", st.correct}};
    }
    j["records"] = json::array();
    for (const auto& r : records) {
      json rj{{"id", r.id},
              {"correct", r.correct},
              {"unparsed", r.unparsed},
              {"seconds", r.seconds}};
      if (r.chosen) rj["chosen"] = std::string(1, r.chosen);
      if (!r.error.empty()) rj["error"] = r.error;
      j["records"].push_back(std::move(rj));
    }
    return j;
  }
};

// Binomial standard error of the accuracy percentage: 100*sqrt(p(1-p)/n).
// This reading reproduces published ± magnitudes at n=1500 within 0.15
// points, e.g. p=0.7620 -> 1.10.
inline double binomial_std_pct(double accuracy_pct, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = accuracy_pct / 100.0;
  return 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Parses the JSONL question file. All malformed lines are reported together
// (with their line numbers) in one QuestionParseError.
inline std::vector<BenchmarkQuestion> load_questions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::question_parse, "cannot open " + path.string());
  std::vector<BenchmarkQuestion> out;
  std::vector<std::string> problems;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      problems.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail("not a JSON object");
      continue;
    }
    BenchmarkQuestion q;
    q.id = j.value("id", "");
    if (q.id.empty()) {
      fail("missing id");
      continue;
    }
    auto ts = j.contains("timestamp") && j.at("timestamp").is_string()
                  ? try_parse_iso8601(j.at("timestamp").get<std::string>())
                  : std::nullopt;
    if (!ts) {
      fail("missing or invalid timestamp");
      continue;
    }
    q.timestamp = *ts;
    q.stem = j.value("stem", "");
    if (q.stem.empty()) {
      fail("missing stem");
      continue;
    }
    if (!j.contains("choices") || !j.at("choices").is_object() ||
        j.at("choices").size() != 4) {
      fail("choices must be an object with exactly A,B,C,D");
      continue;
    }
    bool choices_ok = true;
    for (char c : {'A', 'B', 'C', 'D'}) {
      const std::string key(1, c);
      if (!j.at("choices").contains(key) || !j.at("choices").at(key).is_string()) {
        fail("missing choice " + key);
        choices_ok = false;
        break;
      }
      q.choices[c] = j.at("choices").at(key).get<std::string>();
    }
    if (!choices_ok) continue;
    const std::string key = j.value("answer_key", "");
    if (key.size() != 1 || key[0] < 'A' || key[0] > 'D') {
      fail("answer_key must be one of A,B,C,D");
      continue;
    }
    q.answer_key = key[0];
    q.category = j.value("category", "");
    if (std::find(kQuestionCategories.begin(), kQuestionCategories.end(),
                  q.category) == kQuestionCategories.end()) {
      fail("unknown category '" + q.category + "'");
      continue;
    }
    out.push_back(std::move(q));
  }
  if (!problems.empty()) {
    std::string msg = path.string() + " has " + std::to_string(problems.size()) +
                      " bad line(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(errc::question_parse, msg);
  }
  return out;
}

// Pulls the chosen letter out of the answerer's free text: the letter after
// the last "ANSWER:" marker (case-insensitive), else the last standalone
// capital A–D token.
inline char extract_choice(const std::string& text) {
  std::string upper = text;
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const std::string marker = "ANSWER:";
  auto pos = upper.rfind(marker);
  if (pos != std::string::npos) {
    auto p = pos + marker.size();
    while (p < upper.size() && (upper[p] == ' ' || upper[p] == '\t')) ++p;
    if (p < upper.size() && upper[p] >= 'A' && upper[p] <= 'D') return upper[p];
  }
  // Fallback scans the original text: standalone capital letter tokens.
  static const std::regex token_re(R"((^|[^A-Za-z0-9])([A-D])($|[^A-Za-z0-9]))");
  char found = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), token_re);
       it != std::sregex_iterator{}; ++it) {
    found = (*it)[2].str()[0];
  }
  if (found) return found;
  throw Error(errc::no_choice_found, "no answer letter in reply");
}

namespace detail {

inline std::string question_block(const BenchmarkQuestion& q) {
  std::ostringstream ss;
  ss << "Question (" << format_iso8601(q.timestamp) << "): " << q.stem << "\n";
  for (const auto& [label, text] : q.choices) {
    ss << label << ") " << text << "\n";
  }
  return ss.str();
}

}  // namespace detail

namespace detail {

inline QuestionRecord answer_one(const BenchmarkQuestion& q,
                                 PipelineServices& svc,
                                 const ExecutionOptions& opts, EventLog* log) {
  QuestionRecord rec;
  rec.id = q.id;
  const auto started = std::chrono::steady_clock::now();
  try {
    std::ostringstream query;
    query << q.stem << "\n";
    for (const auto& [label, text] : q.choices) {
      query << label << ") " << text << "\n";
    }
    auto pipeline = run_pipeline(query.str(), q.timestamp, svc, opts, log);
    const std::string prompt = svc.prompts.render(
        LlmRole::Answerer,
        {{"now_iso", format_iso8601(q.timestamp)},
         {"evidence_block", detail::evidence_block(pipeline.items)},
         {"question_block", detail::question_block(q)}});
    const std::string reply =
        svc.llm.complete({LlmRole::Answerer, prompt, 1024, 0.0});
    rec.chosen = extract_choice(reply);
    rec.correct = rec.chosen == q.answer_key;
  } catch (const Error& e) {
    if (e.code() == errc::no_choice_found) {
      rec.unparsed = true;
    } else {
      rec.error = e.what();
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return rec;
}

}  // namespace detail

// Runs the full pipeline per question (the question timestamp is the
// pipeline's `now`), asks the Answerer role for "ANSWER: <letter>", and
// scores. Per-question failures never escape: they score as incorrect,
// with unparsed replies counted separately. Timing covers planning start
// through answer extraction. `jobs` > 1 runs questions concurrently and is
// only sound against live services; scripted gateways are cursor-based and
// must stay at jobs == 1.
inline BenchmarkResult evaluate(const std::vector<BenchmarkQuestion>& questions,
                                PipelineServices& svc,
                                const ExecutionOptions& opts,
                                EventLog* log = nullptr, int jobs = 1) {
  if (jobs < 1) throw Error(errc::precondition, "jobs must be >= 1");
  BenchmarkResult result;
  result.options_used = opts;
  result.n = questions.size();

  std::vector<QuestionRecord> records(questions.size());
  if (jobs == 1) {
    for (std::size_t i = 0; i < questions.size(); ++i) {
      records[i] = detail::answer_one(questions[i], svc, opts, log);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(questions.size()));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= questions.size()) return;
          records[i] = detail::answer_one(questions[i], svc, opts, log);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<double> times;
  times.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    times.push_back(records[i].seconds);
    result.correct += records[i].correct;
    result.unparsed += records[i].unparsed;
    auto& cat = result.per_category[questions[i].category];
    cat.n++;
    cat.correct += records[i].correct;
  }
  result.records = std::move(records);

  if (result.n > 0) {
    result.accuracy_pct =
        100.0 * static_cast<double>(result.correct) / static_cast<double>(result.n);
    result.std_pct = binomial_std_pct(result.accuracy_pct, result.n);
    double sum = 0.0;
    for (double t : times) sum += t;
    result.mean_seconds = sum / static_cast<double>(result.n);
    if (result.n > 1) {
      double ss = 0.0;
      for (double t : times) ss += (t - result.mean_seconds) * (t - result.mean_seconds);
      const double sample_var = ss / static_cast<double>(result.n - 1);
      result.std_seconds = std::sqrt(sample_var / static_cast<double>(result.n));
    }
  }
  return result;
}

// Fixed-width report in the "accuracy ± std | time ± std" style.
inline std::string format_result(const BenchmarkResult& r) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2);
  if (r.n == 0) {
    ss << "no questions\n";
    return ss.str();
  }
  ss << "n=" << r.n << " correct=" << r.correct << " unparsed=" << r.unparsed << "\n";
  ss << "accuracy (%)    | time (s/answer)\n";
  ss << r.accuracy_pct << " ± " << r.std_pct << " | " << r.mean_seconds << " ± "
     << r.std_seconds << "\n";
  for (const auto& cat : kQuestionCategories) {
    auto it = r.per_category.find(cat);
    if (it == r.per_category.end() || it->second.n == 0) continue;
    const double acc = 100.0 * static_cast<double>(it->second.correct) /
                       static_cast<double>(it->second.n);
    ss << "  " << std::left << std::setw(22) << cat << std::right << acc << " ± "
       << binomial_std_pct(acc, it->second.n) << "  (n=" << it->second.n << ")\n";
  }
  return ss.str();
}

}  // namespace finsearch
