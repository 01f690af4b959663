#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "finsearch/error.hpp"

namespace finsearch {

enum class LlmRole { Planner, Rewriter, Generator, Answerer };

inline std::string to_string(LlmRole r) {
  switch (r) {
    case LlmRole::Planner: return "Planner";
    case LlmRole::Rewriter: return "Rewriter";
    case LlmRole::Generator: return "Generator";
    case LlmRole::Answerer: return "Answerer";
  }
  return "Planner";
}

inline std::optional<LlmRole> parse_llm_role(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "planner") return LlmRole::Planner;
  if (s == "rewriter") return LlmRole::Rewriter;
  if (s == "generator") return LlmRole::Generator;
  if (s == "answerer") return LlmRole::Answerer;
  return std::nullopt;
}

struct LlmRequest {
  LlmRole role = LlmRole::Planner;
  std::string prompt;
  int max_output = 1024;
  double temperature = 0.0;  // all roles run deterministic
};

// Uniform chat-completion surface. Implementations: ScriptedBackend for
// offline replay, HttpBackend for a live OpenAI-style endpoint, and
// test-local fakes.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const LlmRequest& request) = 0;
};

// Deterministic scripted stand-in. Entries are consumed strictly in file
// order per role; a role that runs out raises ScriptExhausted. Matching is
// by (role, per-role sequence index), never by prompt content, so prompt
// template edits do not invalidate recorded fixtures.
class ScriptedBackend : public LlmBackend {
 public:
  struct Entry {
    LlmRole role;
    std::string response;
  };

  explicit ScriptedBackend(std::vector<Entry> entries)
      : entries_(std::move(entries)) {}

  // Movable for factory returns; the mutex is never moved while held.
  ScriptedBackend(ScriptedBackend&& other) noexcept
      : entries_(std::move(other.entries_)), cursor_(std::move(other.cursor_)) {}

  static ScriptedBackend from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
      throw Error(errc::script_parse, "script must be {\"entries\": [...]}");
    }
    std::vector<Entry> entries;
    std::size_t idx = 0;
    for (const auto& ej : j.at("entries")) {
      const std::string path = "entries[" + std::to_string(idx++) + "]";
      if (!ej.is_object() || !ej.contains("role") || !ej.at("role").is_string()) {
        throw Error(errc::script_parse, path + ": missing string field 'role'");
      }
      auto role = parse_llm_role(ej.at("role").get<std::string>());
      if (!role) {
        throw Error(errc::script_parse,
                    path + ": unknown role '" + ej.at("role").get<std::string>() + "'");
      }
      if (!ej.contains("response") || !ej.at("response").is_string()) {
        throw Error(errc::script_parse, path + ": missing string field 'response'");
      }
      entries.push_back({*role, ej.at("response").get<std::string>()});
    }
    return ScriptedBackend(std::move(entries));
  }

  static ScriptedBackend load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::script_parse, "cannot open script file '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw Error(errc::script_parse, "script file '" + path + "' is not valid JSON");
    }
    return from_json(j);
  }

  std::string complete(const LlmRequest& request) override {
    std::lock_guard lock(mu_);
    std::size_t skip = cursor_[request.role];
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].role != request.role) continue;
      if (skip == 0) {
        cursor_[request.role]++;
        return entries_[i].response;
      }
      --skip;
    }
    throw Error(errc::script_exhausted,
                "no scripted response left for role " + to_string(request.role));
  }

  std::size_t consumed(LlmRole role) const {
    std::lock_guard lock(mu_);
    auto it = cursor_.find(role);
    return it == cursor_.end() ? 0 : it->second;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  std::map<LlmRole, std::size_t> cursor_;
  mutable std::mutex mu_;
};

struct LlmEndpoint {
  std::string url;         // e.g. http://host:port/v1/chat/completions
  std::string model_name;
  std::string api_key;     // resolved from the configured env var
  int max_output = 1024;
};

struct LlmCallStats {
  std::size_t calls = 0;
  double total_latency_ms = 0.0;
};

namespace detail {
// Splits "http[s]://host[:port]/path" into (origin, path).
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(errc::config, "endpoint url missing scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}
}  // namespace detail

// Live backend speaking the OpenAI-style chat completions shape. One retry
// on transport failure with a 1 s backoff; non-2xx responses surface as
// BackendRefusal.
class HttpBackend : public LlmBackend {
 public:
  // The transport is injectable for tests: takes (origin, path, body_json),
  // returns (status, body) or throws Error(transport).
  using Transport = std::function<std::pair<int, std::string>(
      const std::string&, const std::string&, const std::string&)>;

  explicit HttpBackend(LlmEndpoint endpoint, Transport transport = {})
      : endpoint_(std::move(endpoint)), transport_(std::move(transport)) {}

  std::string complete(const LlmRequest& request) override {
    nlohmann::json body;
    body["model"] = endpoint_.model_name;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output > 0 ? request.max_output
                                                : endpoint_.max_output;
    const auto [origin, path] = detail::split_url(endpoint_.url);

    const auto started = std::chrono::steady_clock::now();
    std::pair<int, std::string> reply;
    for (int attempt = 0;; ++attempt) {
      try {
        reply = send(origin, path, body.dump());
        break;
      } catch (const Error& e) {
        if (e.code() != errc::transport || attempt >= 1) throw;
        std::this_thread::sleep_for(std::chrono::seconds(1));
      }
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    {
      std::lock_guard lock(mu_);
      stats_.calls++;
      stats_.total_latency_ms += elapsed;
    }

    if (reply.first < 200 || reply.first >= 300) {
      throw Error(errc::backend_refusal,
                  "status " + std::to_string(reply.first) + " from " + endpoint_.url);
    }
    nlohmann::json j = nlohmann::json::parse(reply.second, nullptr, false);
    if (j.is_discarded()) {
      throw Error(errc::backend_refusal, "non-JSON completion body");
    }
    try {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw Error(errc::backend_refusal, "unexpected completion shape");
    }
  }

  LlmCallStats stats() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

 private:
  std::pair<int, std::string> send(const std::string& origin,
                                   const std::string& path,
                                   const std::string& body);

  LlmEndpoint endpoint_;
  Transport transport_;
  LlmCallStats stats_;
  mutable std::mutex mu_;
};

}  // namespace finsearch
