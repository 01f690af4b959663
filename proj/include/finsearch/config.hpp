#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "finsearch/fixtures.hpp"
#include "finsearch/llm.hpp"
#include "finsearch/temporal.hpp"

namespace finsearch {

struct LlmBackendConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env;
  int max_output = 2048;
};

struct ConnectorEndpoint {
  std::string endpoint_url;
  std::string api_key_env;
};

// Engine configuration, one JSON document. Relative paths resolve against
// the config file's directory. Secrets never live in the file—only the
// names of environment variables that hold them.
struct EngineConfig {
  std::string llm_mode = "scripted";  // scripted | live
  std::filesystem::path script_path;
  std::map<LlmRole, LlmBackendConfig> llm_backends;  // per role, from "default" + overrides

  std::map<ApiKind, ConnectorEndpoint> connector_endpoints;
  TemporalParams temporal;
  std::filesystem::path fixtures_dir;
  FixtureMode fixtures_mode = FixtureMode::Replay;
  std::filesystem::path prompts_dir;  // empty = built-in templates
  std::filesystem::path out_dir = "out";
  int news_window_days = 7;

  static EngineConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::config, "cannot open config file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw Error(errc::config, "config file " + path.string() + " is not valid JSON");
    }
    return from_json(j, path.parent_path());
  }

  static EngineConfig from_json(const json& j, const std::filesystem::path& base) {
    EngineConfig cfg;
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
      std::filesystem::path fp(p);
      return fp.is_absolute() || base.empty() ? fp : base / fp;
    };

    if (j.contains("llm")) {
      const auto& lj = j.at("llm");
      cfg.llm_mode = lj.value("mode", "scripted");
      if (lj.contains("script_path")) {
        cfg.script_path = resolve(lj.at("script_path").get<std::string>());
      }
      auto parse_backend = [](const json& bj) {
        LlmBackendConfig b;
        b.endpoint_url = bj.value("endpoint_url", "");
        b.model_name = bj.value("model_name", "");
        b.api_key_env = bj.value("api_key_env", "");
        b.max_output = bj.value("max_output", 2048);
        return b;
      };
      LlmBackendConfig def;
      if (lj.contains("default")) def = parse_backend(lj.at("default"));
      for (const auto role : {LlmRole::Planner, LlmRole::Rewriter,
                              LlmRole::Generator, LlmRole::Answerer}) {
        std::string key = to_string(role);
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        cfg.llm_backends[role] = lj.contains(key) ? parse_backend(lj.at(key)) : def;
      }
    }

    if (j.contains("connectors")) {
      const auto& cj = j.at("connectors");
      auto read = [&](const char* key, ApiKind api) {
        if (!cj.contains(key)) return;
        ConnectorEndpoint ep;
        ep.endpoint_url = cj.at(key).value("endpoint_url", "");
        ep.api_key_env = cj.at(key).value("api_key_env", "");
        cfg.connector_endpoints[api] = ep;
      };
      read("news", ApiKind::News);
      read("web", ApiKind::WebSearch);
      read("finance", ApiKind::Finance);
    }

    if (j.contains("temporal")) {
      const auto& tj = j.at("temporal");
      cfg.temporal.window_hours = tj.value("window_hours", 72.0);
      cfg.temporal.numerator_hours = tj.value("numerator_hours", 24.0);
      cfg.temporal.min_delta_hours = tj.value("min_delta_hours", 1.0);
      cfg.temporal.check();
    }

    if (j.contains("fixtures")) {
      const auto& fj = j.at("fixtures");
      if (fj.contains("dir")) cfg.fixtures_dir = resolve(fj.at("dir").get<std::string>());
      if (fj.contains("mode")) {
        auto m = parse_fixture_mode(fj.at("mode").get<std::string>());
        if (!m) {
          throw Error(errc::config, "fixtures.mode must be record, replay or live");
        }
        cfg.fixtures_mode = *m;
      }
    }

    if (j.contains("prompts_dir")) {
      cfg.prompts_dir = resolve(j.at("prompts_dir").get<std::string>());
    }
    if (j.contains("out_dir")) cfg.out_dir = resolve(j.at("out_dir").get<std::string>());
    cfg.news_window_days = j.value("news_window_days", 7);
    if (cfg.news_window_days < 1) {
      throw Error(errc::config, "news_window_days must be >= 1");
    }
    return cfg;
  }

  // Startup validation: referenced paths must exist, and live credentials
  // must be present in the environment, named by variable.
  void validate() const {
    namespace fs = std::filesystem;
    if (llm_mode != "scripted" && llm_mode != "live") {
      throw Error(errc::config, "llm.mode must be 'scripted' or 'live'");
    }
    if (llm_mode == "scripted") {
      if (script_path.empty() || !fs::exists(script_path)) {
        throw Error(errc::config,
                    "scripted llm mode needs an existing llm.script_path (got '" +
                        script_path.string() + "')");
      }
    } else {
      for (const auto& [role, b] : llm_backends) {
        if (b.endpoint_url.empty()) {
          throw Error(errc::config, "live llm mode: no endpoint_url for role " +
                                        to_string(role));
        }
        if (!b.api_key_env.empty() && !std::getenv(b.api_key_env.c_str())) {
          throw Error(errc::config, "environment variable " + b.api_key_env +
                                        " is not set (required for live llm)");
        }
      }
    }
    if (fixtures_mode != FixtureMode::Live) {
      if (fixtures_dir.empty()) {
        throw Error(errc::config, "fixtures.dir required for record/replay mode");
      }
      if (fixtures_mode == FixtureMode::Replay && !fs::exists(fixtures_dir)) {
        throw Error(errc::config,
                    "fixtures.dir does not exist: " + fixtures_dir.string());
      }
    }
    if (fixtures_mode != FixtureMode::Replay) {
      for (const auto& [api, ep] : connector_endpoints) {
        if (!ep.api_key_env.empty() && !std::getenv(ep.api_key_env.c_str())) {
          throw Error(errc::config, "environment variable " + ep.api_key_env +
                                        " is not set (required for " +
                                        to_string(api) + " connector)");
        }
      }
    }
    if (!prompts_dir.empty() && !fs::exists(prompts_dir)) {
      throw Error(errc::config, "prompts_dir does not exist: " + prompts_dir.string());
    }
  }

  std::string resolved_api_key(const std::string& env_name) const {
    if (env_name.empty()) return "";
    const char* v = std::getenv(env_name.c_str());
    return v ? v : "";
  }
};

}  // namespace finsearch
