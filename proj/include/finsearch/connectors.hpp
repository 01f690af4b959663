#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <regex>
#include <string>
#include <vector>

#include "finsearch/fixtures.hpp"
#include "finsearch/types.hpp"

namespace finsearch {

inline constexpr std::size_t kMaxNewsResults = 20;
inline constexpr std::size_t kMaxWebResults = 10;

// Data-source surface the executor runs against. The fixture-backed
// implementation below is the production one; tests may substitute
// synthetic implementations.
class ConnectorSet {
 public:
  virtual ~ConnectorSet() = default;
  virtual std::vector<Evidence> fetch_news(const std::string& query,
                                           TimeWindow window) = 0;
  virtual std::vector<Evidence> fetch_web(const std::string& query) = 0;
  virtual std::vector<OhlcBar> fetch_finance(const std::string& symbol,
                                             TimeWindow range,
                                             BarInterval interval) = 0;
};

// Live side of the connectors: fetches the provider-shaped payload for an
// api + canonical params. Injectable so record mode is testable offline.
class ProviderClient {
 public:
  virtual ~ProviderClient() = default;
  virtual json fetch(ApiKind api, const json& params) = 0;
};

namespace detail {

inline void require_symbol(const std::string& symbol) {
  static const std::regex re(R"(^[A-Za-z0-9.^-]{1,12}$)");
  if (!std::regex_match(symbol, re)) {
    throw Error(errc::precondition, "bad symbol '" + symbol + "'");
  }
}

// Provider payload shape for news/web: {"items": [{"title", "content",
// "source_name", "url", "published_at"?}]}. Junk items are rejected, not
// skipped: a malformed upstream payload is a data-integrity failure.
inline std::vector<Evidence> parse_evidence_payload(const json& payload,
                                                    TimePoint retrieved_at) {
  if (!payload.is_object() || !payload.contains("items") ||
      !payload.at("items").is_array()) {
    throw Error(errc::data_integrity, "payload missing 'items' array");
  }
  std::vector<Evidence> out;
  for (const auto& item : payload.at("items")) {
    Evidence e;
    e.content = item.value("content", "");
    if (e.content.empty()) e.content = item.value("title", "");
    e.source_name = item.value("source_name", "");
    e.source_url = item.value("url", "");
    if (item.contains("published_at") && item.at("published_at").is_string()) {
      auto tp = try_parse_iso8601(item.at("published_at").get<std::string>());
      if (!tp) {
        throw Error(errc::data_integrity,
                    "bad published_at '" +
                        item.at("published_at").get<std::string>() + "'");
      }
      e.published_at = *tp;
    }
    e.retrieved_at = retrieved_at;
    e.check();
    out.push_back(std::move(e));
  }
  return out;
}

// Provider payload shape for finance: {"bars": [{"t","o","h","l","c","v"?}]}
// or {"error": "..."} for provider-reported failures.
inline std::vector<OhlcBar> parse_bars_payload(const json& payload) {
  if (payload.is_object() && payload.contains("error")) {
    const auto msg = payload.at("error").get<std::string>();
    if (msg.find("unknown symbol") != std::string::npos) {
      throw Error(errc::unknown_symbol, msg);
    }
    throw Error(errc::provider, msg);
  }
  if (!payload.is_object() || !payload.contains("bars") ||
      !payload.at("bars").is_array()) {
    throw Error(errc::data_integrity, "payload missing 'bars' array");
  }
  std::vector<OhlcBar> out;
  for (const auto& bj : payload.at("bars")) {
    out.push_back(OhlcBar::from_json(bj));  // validates OHLC invariants
    if (out.size() > 1 && out[out.size() - 2].time >= out.back().time) {
      throw Error(errc::data_integrity, "bars not strictly increasing in time");
    }
  }
  return out;
}

}  // namespace detail

// Record/replay/live connector set. Replay never touches the network; in
// record mode every live payload is persisted before parsing so that a
// later replay reproduces byte-identical results (retrieved_at comes from
// the fixture's recorded_at, not the wall clock).
class Connectors : public ConnectorSet {
 public:
  using Clock = std::function<TimePoint()>;

  Connectors(FixtureMode mode, std::shared_ptr<FixtureStore> store,
             std::shared_ptr<ProviderClient> live = nullptr, Clock clock = {})
      : mode_(mode), store_(std::move(store)), live_(std::move(live)),
        clock_(std::move(clock)) {
    if (mode_ != FixtureMode::Live && !store_) {
      throw Error(errc::config, "record/replay mode needs a fixture store");
    }
    if (mode_ != FixtureMode::Replay && !live_) {
      throw Error(errc::config, "record/live mode needs a provider client");
    }
  }

  FixtureMode mode() const { return mode_; }

  std::vector<Evidence> fetch_news(const std::string& query,
                                   TimeWindow window) override {
    if (window.from > window.to) {
      throw Error(errc::precondition, "news window from > to");
    }
    const auto key = record_key(ApiKind::News,
                                {query, format_iso8601(window.from),
                                 format_iso8601(window.to)});
    json params{{"query", query},
                {"from", format_iso8601(window.from)},
                {"to", format_iso8601(window.to)}};
    const auto [payload, retrieved] = obtain(ApiKind::News, key, params);
    auto items = detail::parse_evidence_payload(payload, retrieved);

    // Drop items dated outside the window, newest first, cap at 20.
    std::erase_if(items, [&](const Evidence& e) {
      return e.published_at && (*e.published_at < window.from ||
                                *e.published_at > window.to);
    });
    std::stable_sort(items.begin(), items.end(),
                     [](const Evidence& a, const Evidence& b) {
                       if (a.published_at && b.published_at) {
                         return *a.published_at > *b.published_at;
                       }
                       return a.published_at.has_value() &&
                              !b.published_at.has_value();
                     });
    if (items.size() > kMaxNewsResults) items.resize(kMaxNewsResults);
    return items;
  }

  std::vector<Evidence> fetch_web(const std::string& query) override {
    if (query.empty()) {
      throw Error(errc::precondition, "web query is empty");
    }
    const auto key = record_key(ApiKind::WebSearch, {query});
    json params{{"query", query}};
    const auto [payload, retrieved] = obtain(ApiKind::WebSearch, key, params);
    auto items = detail::parse_evidence_payload(payload, retrieved);
    if (items.size() > kMaxWebResults) items.resize(kMaxWebResults);
    return items;  // recording order preserved
  }

  std::vector<OhlcBar> fetch_finance(const std::string& symbol, TimeWindow range,
                                     BarInterval interval) override {
    detail::require_symbol(symbol);
    if (range.from >= range.to) {
      throw Error(errc::precondition, "finance range from >= to");
    }
    if (interval == BarInterval::Minute1 &&
        hours_between(range.from, range.to) > 7 * 24.0) {
      throw Error(errc::precondition, "1m interval limited to ranges <= 7 days");
    }
    const auto key = record_key(ApiKind::Finance,
                                {symbol, format_iso8601(range.from),
                                 format_iso8601(range.to), to_string(interval)});
    json params{{"symbol", symbol},
                {"from", format_iso8601(range.from)},
                {"to", format_iso8601(range.to)},
                {"interval", to_string(interval)}};
    const auto [payload, unused] = obtain(ApiKind::Finance, key, params);
    return detail::parse_bars_payload(payload);
  }

 private:
  std::pair<json, TimePoint> obtain(ApiKind api, const std::string& key,
                                    const json& params) {
    if (mode_ == FixtureMode::Replay) {
      auto rec = store_->lookup(key);
      if (!rec) throw Error(errc::fixture_miss, key);
      return {rec->payload, rec->recorded_at};
    }
    json payload = live_->fetch(api, params);
    const TimePoint now =
        clock_ ? clock_()
               : std::chrono::time_point_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now());
    if (mode_ == FixtureMode::Record) {
      store_->save({key, detail::canonical_param(to_string(api)), now, payload});
    }
    return {payload, now};
  }

  FixtureMode mode_;
  std::shared_ptr<FixtureStore> store_;
  std::shared_ptr<ProviderClient> live_;
  Clock clock_;
};

}  // namespace finsearch
