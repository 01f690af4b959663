#include <finsearch/connectors.hpp>

#include <filesystem>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace finsearch;
using fstest::ts;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const TimeWindow kWindow{ts("2024-09-20T00:00:00Z"), ts("2024-09-27T00:00:00Z")};

TEST(RecordKey, CanonicalizationExample) {
  EXPECT_EQ(record_key(ApiKind::News, {"  PBoC  rate cut ",
                                       "2024-09-20T00:00:00Z",
                                       "2024-09-27T00:00:00Z"}),
            "news|pboc rate cut|2024-09-20T00:00:00Z|2024-09-27T00:00:00Z");
}

TEST(RecordKey, DeterministicAndCaseInsensitive) {
  const auto a = record_key(ApiKind::Finance, {"AAPL", "2024-10-01T00:00:00Z",
                                               "2024-10-05T00:00:00Z", "1d"});
  const auto b = record_key(ApiKind::Finance, {"aapl", "2024-10-01T00:00:00Z",
                                               "2024-10-05T00:00:00Z", "1d"});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, record_key(ApiKind::Finance, {"AAPL", "2024-10-01T00:00:00Z",
                                             "2024-10-05T00:00:00Z", "1d"}));
  EXPECT_EQ(record_key(ApiKind::WebSearch, {"Chip\tSector\nOutlook"}),
            "websearch|chip sector outlook");
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("fs_fixtures_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

json news_payload(std::initializer_list<std::pair<std::string, std::string>> items) {
  json payload{{"items", json::array()}};
  for (const auto& [content, published] : items) {
    json item{{"title", content}, {"content", content},
              {"source_name", "wire"}, {"url", "https://wire.test/x"}};
    if (!published.empty()) item["published_at"] = published;
    payload["items"].push_back(item);
  }
  return payload;
}

std::shared_ptr<FixtureStore> store_with(const fs::path& dir,
                                         const std::string& key,
                                         const std::string& api,
                                         const json& payload,
                                         const std::string& recorded_at =
                                             "2024-09-27T00:00:00Z") {
  auto store = std::make_shared<FixtureStore>(dir);
  store->save({key, api, ts(recorded_at), payload});
  return store;
}

TEST(FixtureStore, SaveLookupRoundTrip) {
  TempDir dir;
  auto store = store_with(dir.path(), "news|x|a|b", "news",
                          news_payload({{"hello", ""}}));
  const auto rec = store->lookup("news|x|a|b");
  ASSERT_TRUE(rec.has_value());
  EXPECT_EQ(rec->api, "news");
  EXPECT_EQ(rec->payload.at("items").size(), 1u);
  EXPECT_FALSE(store->lookup("news|y|a|b").has_value());
  // Index is consistent and names the stored key.
  const auto index = store->load_index();
  ASSERT_EQ(index.size(), 1u);
  EXPECT_TRUE(index.count("news|x|a|b"));
}

TEST(FetchNews, ReplayFixtureNewestFirst) {
  TempDir dir;
  const auto key = record_key(ApiKind::News, {"pboc rate cut",
                                              format_iso8601(kWindow.from),
                                              format_iso8601(kWindow.to)});
  auto store = store_with(dir.path(), key, "news",
                          news_payload({{"oldest", "2024-09-21T08:00:00Z"},
                                        {"newest", "2024-09-26T09:00:00Z"},
                                        {"middle", "2024-09-24T10:00:00Z"}}));
  Connectors conn(FixtureMode::Replay, store);
  const auto items = conn.fetch_news("PBoC rate cut", kWindow);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0].content, "newest");
  EXPECT_EQ(items[1].content, "middle");
  EXPECT_EQ(items[2].content, "oldest");
  // retrieved_at is the fixture's recorded_at, not the wall clock.
  EXPECT_EQ(items[0].retrieved_at, ts("2024-09-27T00:00:00Z"));
}

TEST(FetchNews, WindowPreconditionAndMiss) {
  TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  Connectors conn(FixtureMode::Replay, store);
  EXPECT_THROW(conn.fetch_news("q", {kWindow.to, kWindow.from}), Error);
  try {
    conn.fetch_news("unrecorded query", kWindow);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::fixture_miss);
  }
}

TEST(FetchNews, OutOfWindowItemsDroppedAndCapApplied) {
  TempDir dir;
  json payload{{"items", json::array()}};
  for (int i = 0; i < 25; ++i) {
    payload["items"].push_back({{"content", "item " + std::to_string(i)},
                                {"source_name", "wire"},
                                {"url", "u"},
                                {"published_at", "2024-09-2" +
                                     std::to_string(1 + i % 6) + "T0" +
                                     std::to_string(i % 10) + ":00:00Z"}});
  }
  payload["items"].push_back({{"content", "stale"},
                              {"source_name", "wire"},
                              {"url", "u"},
                              {"published_at", "2024-08-01T00:00:00Z"}});
  const auto key = record_key(ApiKind::News, {"big", format_iso8601(kWindow.from),
                                              format_iso8601(kWindow.to)});
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "news", payload));
  const auto items = conn.fetch_news("big", kWindow);
  EXPECT_EQ(items.size(), kMaxNewsResults);
  for (const auto& e : items) {
    EXPECT_NE(e.content, "stale");
    ASSERT_TRUE(e.published_at.has_value());
    EXPECT_GE(*e.published_at, kWindow.from);
    EXPECT_LE(*e.published_at, kWindow.to);
  }
}

TEST(FetchWeb, PreservesRecordingOrder) {
  TempDir dir;
  json payload{{"items", json::array()}};
  for (int i = 0; i < 5; ++i) {
    payload["items"].push_back(
        {{"content", "result " + std::to_string(i)}, {"source_name", "web"},
         {"url", "https://w.test/" + std::to_string(i)}});
  }
  const auto key = record_key(ApiKind::WebSearch, {"chip sector"});
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "websearch", payload));
  const auto items = conn.fetch_web("Chip Sector");
  ASSERT_EQ(items.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(items[static_cast<std::size_t>(i)].content,
              "result " + std::to_string(i));
    EXPECT_FALSE(items[static_cast<std::size_t>(i)].published_at.has_value());
  }
  EXPECT_THROW(conn.fetch_web(""), Error);
}

json bars_payload(std::initializer_list<std::array<double, 4>> bars,
                  const std::string& day_prefix = "2024-10-0") {
  json payload{{"bars", json::array()}};
  int d = 1;
  for (const auto& b : bars) {
    payload["bars"].push_back({{"t", day_prefix + std::to_string(d++) +
                                         "T00:00:00Z"},
                               {"o", b[0]}, {"h", b[1]}, {"l", b[2]},
                               {"c", b[3]}, {"v", 1000}});
  }
  return payload;
}

TEST(FetchFinance, ReplayAscendingBars) {
  TempDir dir;
  const TimeWindow range{ts("2024-10-01T00:00:00Z"), ts("2024-10-05T00:00:00Z")};
  const auto key = record_key(ApiKind::Finance, {"AAPL", format_iso8601(range.from),
                                                 format_iso8601(range.to), "1d"});
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "finance",
                             bars_payload({{100, 105, 99, 104},
                                           {104, 108, 103, 107},
                                           {107, 109, 101, 102},
                                           {102, 103, 98, 100}})));
  const auto bars = conn.fetch_finance("AAPL", range, BarInterval::Day1);
  ASSERT_EQ(bars.size(), 4u);
  for (std::size_t i = 1; i < bars.size(); ++i) {
    EXPECT_LT(bars[i - 1].time, bars[i].time);
  }
}

TEST(FetchFinance, TamperedFixtureSurfacesIntegrityError) {
  TempDir dir;
  const TimeWindow range{ts("2024-10-01T00:00:00Z"), ts("2024-10-05T00:00:00Z")};
  const auto key = record_key(ApiKind::Finance, {"BAD", format_iso8601(range.from),
                                                 format_iso8601(range.to), "1d"});
  // low > high
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "finance",
                             bars_payload({{100, 99, 105, 100}})));
  try {
    conn.fetch_finance("BAD", range, BarInterval::Day1);
    FAIL() << "tampered bar must not pass";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::data_integrity);
  }
}

TEST(FetchFinance, Preconditions) {
  TempDir dir;
  auto store = std::make_shared<FixtureStore>(dir.path());
  Connectors conn(FixtureMode::Replay, store);
  const TimeWindow month{ts("2024-09-01T00:00:00Z"), ts("2024-10-01T00:00:00Z")};
  EXPECT_THROW(conn.fetch_finance("AAPL", month, BarInterval::Minute1), Error);
  EXPECT_THROW(conn.fetch_finance("not a symbol!", month, BarInterval::Day1), Error);
  EXPECT_THROW(
      conn.fetch_finance("AAPL", {month.to, month.from}, BarInterval::Day1), Error);
}

TEST(FetchFinance, UnknownSymbolFromProvider) {
  TempDir dir;
  const TimeWindow range{ts("2024-10-01T00:00:00Z"), ts("2024-10-05T00:00:00Z")};
  const auto key = record_key(ApiKind::Finance, {"ZZZZ", format_iso8601(range.from),
                                                 format_iso8601(range.to), "1d"});
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "finance",
                             json{{"error", "unknown symbol ZZZZ"}}));
  try {
    conn.fetch_finance("ZZZZ", range, BarInterval::Day1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::unknown_symbol);
  }
}

// Fake live provider for record-mode tests; no sockets involved.
class FakeProvider : public ProviderClient {
 public:
  explicit FakeProvider(json payload) : payload_(std::move(payload)) {}
  json fetch(ApiKind, const json&) override {
    ++calls;
    return payload_;
  }
  int calls = 0;

 private:
  json payload_;
};

TEST(RecordReplay, RecordedCallReplaysByteIdentically) {
  TempDir dir;
  auto provider = std::make_shared<FakeProvider>(
      news_payload({{"fresh story", "2024-09-26T08:00:00Z"},
                    {"older story", "2024-09-22T08:00:00Z"}}));
  auto store = std::make_shared<FixtureStore>(dir.path());
  const auto fixed_now = ts("2024-09-27T00:00:00Z");

  Connectors recorder(FixtureMode::Record, store, provider,
                      [&] { return fixed_now; });
  const auto recorded = recorder.fetch_news("pboc rate cut", kWindow);
  EXPECT_EQ(provider->calls, 1);

  Connectors replayer(FixtureMode::Replay, store);
  const auto replayed = replayer.fetch_news("pboc rate cut", kWindow);
  EXPECT_EQ(provider->calls, 1);  // replay is hermetic

  ASSERT_EQ(recorded.size(), replayed.size());
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    EXPECT_EQ(recorded[i].to_json().dump(), replayed[i].to_json().dump());
  }
}

TEST(RecordReplay, LiveModeNeverTouchesStore) {
  TempDir dir;
  auto provider = std::make_shared<FakeProvider>(news_payload({{"x", ""}}));
  Connectors live(FixtureMode::Live, nullptr, provider,
                  [] { return ts("2024-09-27T00:00:00Z"); });
  EXPECT_EQ(live.fetch_news("q", kWindow).size(), 1u);
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(RecordReplay, ModePreconditions) {
  auto store = std::make_shared<FixtureStore>("/tmp/unused");
  EXPECT_THROW(Connectors(FixtureMode::Record, store, nullptr), Error);
  EXPECT_THROW(Connectors(FixtureMode::Replay, nullptr), Error);
}

TEST(EvidenceValidation, UpstreamJunkRejected) {
  TempDir dir;
  json payload{{"items", json::array({{{"content", ""}, {"source_name", "w"}}})}};
  const auto key = record_key(ApiKind::WebSearch, {"junk"});
  Connectors conn(FixtureMode::Replay,
                  store_with(dir.path(), key, "websearch", payload));
  EXPECT_THROW(conn.fetch_web("junk"), Error);

  // published_at after retrieved_at is junk too.
  json late{{"items", json::array({{{"content", "x"},
                                    {"published_at", "2030-01-01T00:00:00Z"}}})}};
  const auto key2 = record_key(ApiKind::WebSearch, {"late"});
  Connectors conn2(FixtureMode::Replay,
                   store_with(dir.path(), key2, "websearch", late));
  EXPECT_THROW(conn2.fetch_web("late"), Error);
}

}  // namespace
