#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include "finsearch/error.hpp"

namespace finsearch {

// All timestamps in the engine are UTC with second resolution.
using TimePoint = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

struct TimeWindow {
  TimePoint from{};
  TimePoint to{};
};

inline Date date_of(TimePoint tp) {
  return std::chrono::floor<std::chrono::days>(tp);
}

inline TimePoint start_of_day(Date d) { return TimePoint{d}; }

inline double hours_between(TimePoint a, TimePoint b) {
  const auto delta = (a > b) ? (a - b) : (b - a);
  return std::chrono::duration<double, std::ratio<3600>>(delta).count();
}

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_iso8601(TimePoint tp) {
  using namespace std::chrono;
  const auto d = floor<days>(tp);
  const year_month_day ymd{d};
  const hh_mm_ss hms{tp - d};
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                int(hms.hours().count()), int(hms.minutes().count()),
                int(hms.seconds().count()));
  return buf;
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.fff][Z|±HH:MM]". Fractional
// seconds are truncated. A missing zone designator is read as UTC; pass
// `assumed_utc` to learn when that fallback fired so callers can warn.
inline std::optional<TimePoint> try_parse_iso8601(const std::string& text,
                                                  bool* assumed_utc = nullptr) {
  using namespace std::chrono;
  if (assumed_utc) *assumed_utc = false;
  int y = 0, mo = 0, da = 0, h = 0, mi = 0, s = 0;
  int n = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &mo, &da, &n) != 3) {
    return std::nullopt;
  }
  std::size_t pos = static_cast<std::size_t>(n);
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
    ++pos;
    if (std::sscanf(text.c_str() + pos, "%2d:%2d:%2d%n", &h, &mi, &s, &n) != 3) {
      return std::nullopt;
    }
    pos += static_cast<std::size_t>(n);
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
  }
  long long offset_seconds = 0;
  if (pos < text.size()) {
    const char z = text[pos];
    if (z == 'Z' || z == 'z') {
      ++pos;
    } else if (z == '+' || z == '-') {
      int oh = 0, om = 0;
      if (std::sscanf(text.c_str() + pos + 1, "%2d:%2d%n", &oh, &om, &n) != 2) {
        return std::nullopt;
      }
      offset_seconds = (oh * 3600LL + om * 60LL) * (z == '+' ? 1 : -1);
      pos += 1 + static_cast<std::size_t>(n);
    } else {
      return std::nullopt;
    }
  } else if (assumed_utc) {
    *assumed_utc = true;
  }
  if (pos != text.size()) return std::nullopt;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(da)}};
  if (!ymd.ok()) return std::nullopt;
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  auto tp = TimePoint{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s};
  tp -= seconds{offset_seconds};
  return tp;
}

inline TimePoint parse_iso8601(const std::string& text) {
  auto tp = try_parse_iso8601(text);
  if (!tp) throw Error(errc::precondition, "invalid timestamp '" + text + "'");
  return *tp;
}

inline std::optional<Date> try_parse_date(const std::string& text) {
  using namespace std::chrono;
  int y = 0, mo = 0, da = 0;
  int n = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%n", &y, &mo, &da, &n) != 3 ||
      static_cast<std::size_t>(n) != text.size()) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(da)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace finsearch
