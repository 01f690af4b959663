#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "finsearch/time.hpp"
#include "finsearch/types.hpp"

namespace finsearch {

enum class FixtureMode { Record, Replay, Live };

inline std::optional<FixtureMode> parse_fixture_mode(const std::string& s) {
  if (s == "record") return FixtureMode::Record;
  if (s == "replay") return FixtureMode::Replay;
  if (s == "live") return FixtureMode::Live;
  return std::nullopt;
}

inline std::string to_string(FixtureMode m) {
  switch (m) {
    case FixtureMode::Record: return "record";
    case FixtureMode::Replay: return "replay";
    case FixtureMode::Live: return "live";
  }
  return "replay";
}

namespace detail {

inline std::string canonical_param(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::string fnv1a64_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + tmp);
    out << content;
    if (!out.flush()) throw Error(errc::io, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(errc::io, "rename " + tmp + ": " + ec.message());
}

}  // namespace detail

// Deterministic request key: lowercase api name plus canonicalized params
// (trimmed, case-folded, runs of whitespace collapsed), '|'-joined.
// Timestamp params are re-emitted in canonical ISO-8601 UTC instead of
// being case-folded.
inline std::string record_key(ApiKind api, const std::vector<std::string>& params) {
  std::string key = detail::canonical_param(to_string(api));
  for (const auto& p : params) {
    key += '|';
    std::string trimmed = p;
    const auto b = trimmed.find_first_not_of(" \t\r\n");
    const auto e = trimmed.find_last_not_of(" \t\r\n");
    trimmed = b == std::string::npos ? "" : trimmed.substr(b, e - b + 1);
    if (auto d = try_parse_date(trimmed)) {
      key += format_date(*d);
    } else if (auto tp = try_parse_iso8601(trimmed)) {
      key += format_iso8601(*tp);
    } else {
      key += detail::canonical_param(trimmed);
    }
  }
  return key;
}

// One JSON file per request key under the fixture directory, named by the
// key's FNV-1a hash, plus an index.json mapping keys to files. Writes are
// atomic per file so an interrupted recording never corrupts the index.
class FixtureStore {
 public:
  struct Record {
    std::string key;
    std::string api;
    TimePoint recorded_at{};
    json payload;
  };

  FixtureStore() = default;
  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::optional<Record> lookup(const std::string& key) const {
    const auto path = dir_ / (detail::fnv1a64_hex(key) + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw Error(errc::data_integrity, "fixture " + path.string() + " is not JSON");
    }
    Record rec;
    rec.key = j.value("key", "");
    if (rec.key != key) {
      throw Error(errc::data_integrity,
                  "fixture " + path.string() + " key mismatch (hash collision?)");
    }
    rec.api = j.value("api", "");
    rec.recorded_at = parse_iso8601(j.at("recorded_at").get<std::string>());
    rec.payload = j.at("payload");
    return rec;
  }

  void save(const Record& rec) {
    std::lock_guard lock(mu_);
    std::filesystem::create_directories(dir_);
    json j;
    j["key"] = rec.key;
    j["recorded_at"] = format_iso8601(rec.recorded_at);
    j["api"] = rec.api;
    j["payload"] = rec.payload;
    const auto file = detail::fnv1a64_hex(rec.key) + ".json";
    detail::atomic_write(dir_ / file, j.dump(2) + "\n");

    auto index = load_index();
    index[rec.key] = file;
    json idx;
    idx["entries"] = json::array();
    for (const auto& [k, f] : index) {
      idx["entries"].push_back({{"key", k}, {"file", f}});
    }
    detail::atomic_write(dir_ / "index.json", idx.dump(2) + "\n");
  }

  std::map<std::string, std::string> load_index() const {
    std::map<std::string, std::string> out;
    std::ifstream in(dir_ / "index.json");
    if (!in) return out;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("entries")) return out;
    for (const auto& e : j.at("entries")) {
      out[e.value("key", "")] = e.value("file", "");
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
};

}  // namespace finsearch
