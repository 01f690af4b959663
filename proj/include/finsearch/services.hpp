#pragma once

// Wires an EngineConfig into live objects. Pulls in the HTTP stack, so only
// entry points (the CLI, live integration tests) should include this.

#include <memory>

#include "finsearch/config.hpp"
#include "finsearch/connectors.hpp"
#include "finsearch/engine.hpp"
#include "finsearch/http_transport.hpp"

namespace finsearch {

// Routes each request to the backend configured for its role.
class RoleRoutingBackend : public LlmBackend {
 public:
  explicit RoleRoutingBackend(std::map<LlmRole, std::shared_ptr<LlmBackend>> backends)
      : backends_(std::move(backends)) {}

  std::string complete(const LlmRequest& request) override {
    auto it = backends_.find(request.role);
    if (it == backends_.end() || !it->second) {
      throw Error(errc::config, "no backend for role " + to_string(request.role));
    }
    return it->second->complete(request);
  }

 private:
  std::map<LlmRole, std::shared_ptr<LlmBackend>> backends_;
};

// Wraps any backend and remembers every (role, response) pair so a live
// session can be saved as a script file for later replay.
class RecordingBackend : public LlmBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<LlmBackend> inner)
      : inner_(std::move(inner)) {}

  std::string complete(const LlmRequest& request) override {
    auto text = inner_->complete(request);
    std::lock_guard lock(mu_);
    entries_.push_back({request.role, text});
    return text;
  }

  json script_json() const {
    std::lock_guard lock(mu_);
    json j;
    j["entries"] = json::array();
    for (const auto& e : entries_) {
      j["entries"].push_back({{"role", to_string(e.role)}, {"response", e.response}});
    }
    return j;
  }

 private:
  std::shared_ptr<LlmBackend> inner_;
  std::vector<ScriptedBackend::Entry> entries_;
  mutable std::mutex mu_;
};

// Live provider client: GETs the configured endpoint per api with the
// request params as query string and returns the payload JSON.
class HttpProviderClient : public ProviderClient {
 public:
  explicit HttpProviderClient(const EngineConfig& cfg) {
    for (const auto& [api, ep] : cfg.connector_endpoints) {
      endpoints_[api] = {ep.endpoint_url, cfg.resolved_api_key(ep.api_key_env)};
    }
  }

  json fetch(ApiKind api, const json& params) override {
    auto it = endpoints_.find(api);
    if (it == endpoints_.end() || it->second.first.empty()) {
      throw Error(errc::config,
                  "no endpoint configured for " + to_string(api) + " connector");
    }
    httplib::Params qp;
    for (const auto& [k, v] : params.items()) {
      qp.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    const auto body = http_get_json(it->second.first, qp, it->second.second);
    json payload = json::parse(body, nullptr, false);
    if (payload.is_discarded()) {
      throw Error(errc::provider, to_string(api) + " provider returned non-JSON");
    }
    return payload;
  }

 private:
  std::map<ApiKind, std::pair<std::string, std::string>> endpoints_;  // url, key
};

struct Services {
  std::shared_ptr<LlmBackend> llm;
  std::shared_ptr<ScriptedBackend> scripted;    // set in scripted mode
  std::shared_ptr<RecordingBackend> recorder;   // set when record_llm
  std::shared_ptr<FixtureStore> store;
  std::shared_ptr<ConnectorSet> connectors;
  PromptLibrary prompts;

  PipelineServices pipeline(const EngineConfig& cfg) {
    return PipelineServices{*connectors, *llm, prompts, cfg.temporal,
                            cfg.news_window_days};
  }
};

// `clock` pins retrieved_at timestamps in record mode; pass the --now value
// for reproducible recordings.
inline Services make_services(const EngineConfig& cfg,
                              Connectors::Clock clock = {},
                              bool record_llm = false) {
  Services s;
  if (cfg.llm_mode == "scripted") {
    s.scripted = std::make_shared<ScriptedBackend>(ScriptedBackend::load(cfg.script_path.string()));
    s.llm = s.scripted;
  } else {
    std::map<LlmRole, std::shared_ptr<LlmBackend>> by_role;
    for (const auto& [role, b] : cfg.llm_backends) {
      LlmEndpoint ep{b.endpoint_url, b.model_name,
                     cfg.resolved_api_key(b.api_key_env), b.max_output};
      by_role[role] = std::make_shared<HttpBackend>(std::move(ep));
    }
    s.llm = std::make_shared<RoleRoutingBackend>(std::move(by_role));
  }
  if (record_llm) {
    s.recorder = std::make_shared<RecordingBackend>(s.llm);
    s.llm = s.recorder;
  }

  if (cfg.fixtures_mode != FixtureMode::Live) {
    s.store = std::make_shared<FixtureStore>(cfg.fixtures_dir);
  }
  std::shared_ptr<ProviderClient> live;
  if (cfg.fixtures_mode != FixtureMode::Replay) {
    live = std::make_shared<HttpProviderClient>(cfg);
  }
  s.connectors = std::make_shared<Connectors>(cfg.fixtures_mode, s.store, live,
                                              std::move(clock));

  s.prompts = cfg.prompts_dir.empty()
                  ? PromptLibrary{}
                  : PromptLibrary::from_directory(cfg.prompts_dir);
  return s;
}

}  // namespace finsearch
