#pragma once

// Live HTTP plumbing, split out so offline translation units never pull in
// the socket stack. Include finsearch/finsearch.hpp (or this header) in any
// binary that talks to real endpoints.

#include <httplib.h>

#include "finsearch/llm.hpp"

namespace finsearch {

inline std::pair<int, std::string> HttpBackend::send(const std::string& origin,
                                                     const std::string& path,
                                                     const std::string& body) {
  if (transport_) return transport_(origin, path, body);
  httplib::Client cli(origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(120);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }
  auto res = cli.Post(path, headers, body, "application/json");
  if (!res) {
    throw Error(errc::transport,
                "POST " + origin + path + ": " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

// GET with query parameters against a provider endpoint; used by the live
// connector transport. Returns the raw body on 2xx, throws otherwise.
inline std::string http_get_json(const std::string& url,
                                 const httplib::Params& params,
                                 const std::string& api_key) {
  const auto [origin, path] = detail::split_url(url);
  httplib::Client cli(origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(60);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("X-Api-Key", api_key);

  auto attempt = [&]() -> httplib::Result {
    return cli.Get(httplib::append_query_params(path, params), headers);
  };
  auto res = attempt();
  // One retry on transport failure or retryable status.
  if (!res || res->status == 429 || res->status >= 500) {
    std::this_thread::sleep_for(std::chrono::seconds(1));
    auto retry = attempt();
    if (retry || !res) res = std::move(retry);
  }
  if (!res) {
    throw Error(errc::transport,
                "GET " + url + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(errc::provider,
                "provider returned " + std::to_string(res->status) + " for " + url);
  }
  return res->body;
}

}  // namespace finsearch
