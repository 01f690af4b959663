#pragma once

#include <cctype>
#include <optional>
#include <regex>
#include <string>

#include "finsearch/time.hpp"

namespace finsearch {

// Supported relative-date grammar. Anything outside it raises
// UnresolvableDateExpr and the surface form flows through to the sub-query
// untouched:
//   today | yesterday | N days ago | last <weekday> | last week |
//   last month | this week | this quarter | YYYY-MM-DD (passthrough)
// Span forms resolve to a representative day: last/this week -> Monday,
// last month -> first of month, this quarter -> first of quarter.
// "last <weekday>" is the most recent strictly-previous occurrence.
inline Date resolve_relative_date(const std::string& expr, TimePoint now) {
  using namespace std::chrono;
  const Date today = date_of(now);

  std::string s;
  s.reserve(expr.size());
  for (char c : expr) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!s.empty() && s.back() != ' ') {
      s += ' ';
    }
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();

  if (auto abs = try_parse_date(s)) return *abs;
  if (s == "today") return today;
  if (s == "yesterday") return today - days{1};

  static const std::regex days_ago_re(R"(^(\d{1,4}) days? ago$)");
  std::smatch m;
  if (std::regex_match(s, m, days_ago_re)) {
    return today - days{std::stoi(m[1].str())};
  }

  static const std::pair<const char*, unsigned> weekdays[] = {
      {"sunday", 0}, {"monday", 1},   {"tuesday", 2}, {"wednesday", 3},
      {"thursday", 4}, {"friday", 5}, {"saturday", 6}};
  if (s.rfind("last ", 0) == 0) {
    const std::string rest = s.substr(5);
    for (const auto& [name, code] : weekdays) {
      if (rest == name) {
        const weekday target{code};
        const weekday wd{today};
        unsigned back = (wd.c_encoding() + 7 - target.c_encoding()) % 7;
        if (back == 0) back = 7;  // strictly previous occurrence
        return today - days{back};
      }
    }
  }

  const weekday wd{today};
  // Monday-anchored weeks.
  const unsigned since_monday = (wd.c_encoding() + 6) % 7;
  if (s == "this week") return today - days{since_monday};
  if (s == "last week") return today - days{since_monday + 7};

  const year_month_day ymd{today};
  if (s == "last month") {
    year_month ym{ymd.year(), ymd.month()};
    ym -= months{1};  // year carry handled by year_month arithmetic
    return sys_days{ym.year() / ym.month() / day{1}};
  }
  if (s == "this quarter") {
    const unsigned q_start = ((unsigned(ymd.month()) - 1) / 3) * 3 + 1;
    return sys_days{ymd.year() / month{q_start} / day{1}};
  }

  throw Error(errc::unresolvable_date_expr, "'" + expr + "'");
}

struct ResolvedDate {
  std::string surface_form;
  Date resolved{};
};

// Scans free text for occurrences of the supported grammar and resolves
// each hit. Matches are case-insensitive and non-overlapping.
inline std::vector<ResolvedDate> scan_date_expressions(const std::string& text,
                                                       TimePoint now) {
  static const std::regex re(
      R"((\d{4}-\d{2}-\d{2})|(\d{1,4}\s+days?\s+ago)|\b(today|yesterday)\b)"
      R"(|\b(last\s+(?:monday|tuesday|wednesday|thursday|friday|saturday|sunday|week|month))\b)"
      R"(|\b(this\s+(?:week|quarter))\b)",
      std::regex::icase);
  std::vector<ResolvedDate> out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), re);
  for (auto it = begin; it != std::sregex_iterator{}; ++it) {
    const std::string surface = it->str();
    try {
      out.push_back({surface, resolve_relative_date(surface, now)});
    } catch (const Error&) {
      // Absolute-date lookalikes that fail calendar validation are skipped.
    }
  }
  return out;
}

}  // namespace finsearch
