#include <finsearch/http_transport.hpp>
#include <finsearch/llm.hpp>

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

using namespace finsearch;
using nlohmann::json;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << body;
  return path;
}

TEST(ScriptedBackend, ReplaysEntriesByRole) {
  const auto path = write_temp("script_basic.json", R"({"entries": [
    {"role": "Planner", "response": "{\"plan\": 1}"},
    {"role": "Rewriter", "response": "KEEP"},
    {"role": "Generator", "response": "report text"}
  ]})");
  auto backend = ScriptedBackend::load(path.string());
  EXPECT_EQ(backend.size(), 3u);
  EXPECT_EQ(backend.complete({LlmRole::Planner, "anything"}), "{\"plan\": 1}");
  EXPECT_EQ(backend.complete({LlmRole::Rewriter, "p"}), "KEEP");
  EXPECT_EQ(backend.complete({LlmRole::Generator, "g"}), "report text");
}

TEST(ScriptedBackend, ExhaustedRole) {
  ScriptedBackend backend({{LlmRole::Planner, "only one"}});
  EXPECT_EQ(backend.complete({LlmRole::Planner, "x"}), "only one");
  try {
    backend.complete({LlmRole::Planner, "x"});
    FAIL() << "expected ScriptExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::script_exhausted);
  }
}

TEST(ScriptedBackend, RolesHaveIndependentCursors) {
  ScriptedBackend backend({{LlmRole::Planner, "p1"},
                           {LlmRole::Rewriter, "r1"},
                           {LlmRole::Planner, "p2"}});
  EXPECT_EQ(backend.complete({LlmRole::Planner, ""}), "p1");
  EXPECT_EQ(backend.complete({LlmRole::Planner, ""}), "p2");
  EXPECT_EQ(backend.complete({LlmRole::Rewriter, ""}), "r1");
  EXPECT_EQ(backend.consumed(LlmRole::Planner), 2u);
  EXPECT_EQ(backend.consumed(LlmRole::Rewriter), 1u);
  EXPECT_EQ(backend.consumed(LlmRole::Generator), 0u);
}

TEST(ScriptedBackend, EmptyScriptIsValidButExhausted) {
  const auto path = write_temp("script_empty.json", R"({"entries": []})");
  auto backend = ScriptedBackend::load(path.string());
  EXPECT_EQ(backend.size(), 0u);
  EXPECT_THROW(backend.complete({LlmRole::Planner, "x"}), Error);
}

TEST(ScriptedBackend, MissingRoleIsParseError) {
  const auto path = write_temp("script_norole.json",
                               R"({"entries": [{"response": "hi"}]})");
  try {
    ScriptedBackend::load(path.string());
    FAIL() << "expected ScriptParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::script_parse);
    EXPECT_NE(std::string(e.what()).find("entries[0]"), std::string::npos);
  }
}

TEST(ScriptedBackend, UnknownRoleAndBadJson) {
  EXPECT_THROW(ScriptedBackend::from_json(json::parse(
                   R"({"entries": [{"role": "Oracle", "response": "x"}]})")),
               Error);
  const auto path = write_temp("script_bad.json", "not json at all");
  EXPECT_THROW(ScriptedBackend::load(path.string()), Error);
  EXPECT_THROW(ScriptedBackend::load("/nonexistent/script.json"), Error);
}

TEST(ScriptedBackend, DeterministicAcrossRuns) {
  const auto path = write_temp("script_det.json", R"({"entries": [
    {"role": "Planner", "response": "alpha"},
    {"role": "Planner", "response": "beta"},
    {"role": "Answerer", "response": "ANSWER: C"}
  ]})");
  std::vector<std::string> first, second;
  for (auto* out : {&first, &second}) {
    auto backend = ScriptedBackend::load(path.string());
    out->push_back(backend.complete({LlmRole::Planner, "pr1"}));
    out->push_back(backend.complete({LlmRole::Planner, "pr2"}));
    out->push_back(backend.complete({LlmRole::Answerer, "q"}));
  }
  EXPECT_EQ(first, second);
}

TEST(ScriptedBackend, CompleteDoesNotMutateRequest) {
  ScriptedBackend backend({{LlmRole::Planner, "x"}});
  LlmRequest req{LlmRole::Planner, "prompt body", 512, 0.0};
  backend.complete(req);
  EXPECT_EQ(req.prompt, "prompt body");
  EXPECT_EQ(req.max_output, 512);
  EXPECT_EQ(req.temperature, 0.0);
}

// ---- HttpBackend over an injected transport (no sockets) ----

TEST(HttpBackend, ParsesChatCompletion) {
  int calls = 0;
  HttpBackend backend(
      {"http://llm.test/v1/chat/completions", "test-model", "sk-test", 256},
      [&](const std::string& origin, const std::string& path,
          const std::string& body) {
        ++calls;
        EXPECT_EQ(origin, "http://llm.test");
        EXPECT_EQ(path, "/v1/chat/completions");
        const auto j = json::parse(body);
        EXPECT_EQ(j.at("model"), "test-model");
        EXPECT_EQ(j.at("temperature"), 0.0);
        json reply{{"choices", {{{"message", {{"content", "hello"}}}}}}};
        return std::make_pair(200, reply.dump());
      });
  EXPECT_EQ(backend.complete({LlmRole::Generator, "hi", 128, 0.0}), "hello");
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(backend.stats().calls, 1u);
  EXPECT_GE(backend.stats().total_latency_ms, 0.0);
}

TEST(HttpBackend, RetriesOnceOnTransportError) {
  int calls = 0;
  HttpBackend backend(
      {"http://llm.test/v1", "m", "", 256},
      [&](const std::string&, const std::string&, const std::string&)
          -> std::pair<int, std::string> {
        if (++calls == 1) throw Error(errc::transport, "connection reset");
        json reply{{"choices", {{{"message", {{"content", "recovered"}}}}}}};
        return {200, reply.dump()};
      });
  EXPECT_EQ(backend.complete({LlmRole::Planner, "p"}), "recovered");
  EXPECT_EQ(calls, 2);
}

TEST(HttpBackend, GivesUpAfterSecondTransportFailure) {
  int calls = 0;
  HttpBackend backend({"http://llm.test/v1", "m", "", 256},
                      [&](const std::string&, const std::string&,
                          const std::string&) -> std::pair<int, std::string> {
                        ++calls;
                        throw Error(errc::transport, "down");
                      });
  EXPECT_THROW(backend.complete({LlmRole::Planner, "p"}), Error);
  EXPECT_EQ(calls, 2);
}

TEST(HttpBackend, NonOkStatusIsRefusal) {
  HttpBackend backend({"http://llm.test/v1", "m", "", 256},
                      [](const std::string&, const std::string&,
                         const std::string&) -> std::pair<int, std::string> {
                        return {403, "forbidden"};
                      });
  try {
    backend.complete({LlmRole::Planner, "p"});
    FAIL() << "expected BackendRefusal";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::backend_refusal);
  }
}

// ---- live loopback smoke test; skipped when no loopback is available ----

TEST(HttpBackend, LoopbackEndToEnd) {
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [](const httplib::Request& req, httplib::Response& res) {
                const auto j = json::parse(req.body);
                json reply{
                    {"choices",
                     {{{"message",
                        {{"content", "echo: " + j.at("messages")[0]
                                                     .at("content")
                                                     .get<std::string>()}}}}}}};
                res.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) GTEST_SKIP() << "no loopback interface available";
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackend backend({"http://127.0.0.1:" + std::to_string(port) +
                           "/v1/chat/completions",
                       "loop-model", "", 256});
  EXPECT_EQ(backend.complete({LlmRole::Answerer, "ping"}), "echo: ping");

  server.stop();
  server_thread.join();
}

}  // namespace
