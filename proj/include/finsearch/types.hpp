#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsearch/error.hpp"
#include "finsearch/time.hpp"

namespace finsearch {

using json = nlohmann::json;

// The three data-source families a sub-query can target.
enum class ApiKind { News, WebSearch, Finance };

inline std::string to_string(ApiKind k) {
  switch (k) {
    case ApiKind::News: return "News";
    case ApiKind::WebSearch: return "WebSearch";
    case ApiKind::Finance: return "Finance";
  }
  return "News";
}

inline std::optional<ApiKind> parse_api_kind(const std::string& s) {
  if (s == "News") return ApiKind::News;
  if (s == "WebSearch") return ApiKind::WebSearch;
  if (s == "Finance") return ApiKind::Finance;
  return std::nullopt;
}

// One timestamped retrieval result with source attribution. `weight` is
// filled in by the temporal annotation pass, not by connectors.
struct Evidence {
  std::string content;
  std::string source_name;
  std::string source_url;
  std::optional<TimePoint> published_at;
  TimePoint retrieved_at{};
  std::optional<double> weight;

  void check() const {
    if (content.empty()) {
      throw Error(errc::data_integrity, "evidence content is empty");
    }
    if (published_at && *published_at > retrieved_at) {
      throw Error(errc::data_integrity,
                  "evidence published_at after retrieved_at");
    }
  }

  json to_json() const {
    json j;
    j["content"] = content;
    j["source_name"] = source_name;
    j["source_url"] = source_url;
    if (published_at) j["published_at"] = format_iso8601(*published_at);
    j["retrieved_at"] = format_iso8601(retrieved_at);
    if (weight) j["weight"] = *weight;
    return j;
  }

  static Evidence from_json(const json& j) {
    Evidence e;
    e.content = j.at("content").get<std::string>();
    e.source_name = j.value("source_name", "");
    e.source_url = j.value("source_url", "");
    if (j.contains("published_at")) {
      e.published_at = parse_iso8601(j.at("published_at").get<std::string>());
    }
    e.retrieved_at = parse_iso8601(j.at("retrieved_at").get<std::string>());
    if (j.contains("weight")) e.weight = j.at("weight").get<double>();
    e.check();
    return e;
  }
};

// One candlestick sample.
struct OhlcBar {
  TimePoint time{};
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  std::optional<double> volume;

  void check() const {
    if (open <= 0 || high <= 0 || low <= 0 || close <= 0) {
      throw Error(errc::data_integrity, "ohlc prices must be positive");
    }
    if (low > high || low > std::min(open, close) ||
        high < std::max(open, close)) {
      throw Error(errc::data_integrity,
                  "ohlc bar violates low<=min(o,c)<=max(o,c)<=high at " +
                      format_iso8601(time));
    }
    if (volume && *volume < 0) {
      throw Error(errc::data_integrity, "negative volume");
    }
  }

  json to_json() const {
    json j;
    j["t"] = format_iso8601(time);
    j["o"] = open;
    j["h"] = high;
    j["l"] = low;
    j["c"] = close;
    if (volume) j["v"] = *volume;
    return j;
  }

  static OhlcBar from_json(const json& j) {
    OhlcBar b;
    b.time = parse_iso8601(j.at("t").get<std::string>());
    b.open = j.at("o").get<double>();
    b.high = j.at("h").get<double>();
    b.low = j.at("l").get<double>();
    b.close = j.at("c").get<double>();
    if (j.contains("v")) b.volume = j.at("v").get<double>();
    b.check();
    return b;
  }
};

enum class BarInterval { Minute1, Day1 };

inline std::string to_string(BarInterval i) {
  return i == BarInterval::Minute1 ? "1m" : "1d";
}

inline std::optional<BarInterval> parse_bar_interval(const std::string& s) {
  if (s == "1m") return BarInterval::Minute1;
  if (s == "1d") return BarInterval::Day1;
  return std::nullopt;
}

}  // namespace finsearch
