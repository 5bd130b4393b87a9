#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

#include "../common/scripted_server.h"
#include "chronoqa/error.h"
#include "chronoqa/gateway.h"
#include "chronoqa/mock_oracle.h"

namespace chronoqa {
namespace {

namespace fs = std::filesystem;
using testing::ScriptedServer;

EndpointConfig config_for(const std::string& url) {
  EndpointConfig c;
  c.base_url = url;
  c.model_name = "test-model";
  c.api_key = "secret";
  c.timeout = std::chrono::milliseconds(5000);
  c.initial_backoff = std::chrono::milliseconds(5);
  return c;
}

Gateway http_gateway(const EndpointConfig& c) {
  return Gateway(c, std::make_shared<HttpTransport>(c.base_url, c.api_key, c.timeout));
}

Messages ask(const std::string& q) { return {{"system", "s"}, {"user", q}}; }

void reply(httplib::Response& res, const std::string& text) {
  res.set_content(completion_to_wire_json("test-model", text), "application/json");
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chronoqa_gateway_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Gateway, WireFormat) {
  const ChatRequest req{"m", ask("hi"), 0.0};
  const ChatRequest back = chat_request_from_wire(to_wire_json(req));
  EXPECT_EQ(back.model, "m");
  EXPECT_EQ(back.messages, req.messages);
  EXPECT_EQ(completion_from_wire(completion_to_wire_json("m", "answer")), "answer");
  EXPECT_THROW(completion_from_wire("{\"choices\":[]}"), Error);
  EXPECT_THROW(completion_from_wire("not json"), Error);
}

TEST(Gateway, RetriesAfter429) {
  std::atomic<int> calls{0};
  ScriptedServer server([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 429;
      return;
    }
    reply(res, "Fiorentina  \n");
  });
  auto gw = http_gateway(config_for(server.base_url()));
  const Prediction p = gw.complete(ask("q"), "i1");
  EXPECT_EQ(p.attempt_count, 2);
  EXPECT_EQ(p.raw_text, "Fiorentina");
  EXPECT_FALSE(p.from_cache);
}

TEST(Gateway, AuthFailureIsFatalWithoutRetry) {
  std::atomic<int> calls{0};
  ScriptedServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    if (req.get_header_value("Authorization") != "Bearer right") {
      res.status = 401;
      return;
    }
    reply(res, "ok");
  });
  auto gw = http_gateway(config_for(server.base_url()));
  try {
    gw.complete(ask("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEndpointFatal);
  }
  EXPECT_EQ(calls.load(), 1);
}

TEST(Gateway, ExhaustedRetriesAreTransient) {
  std::atomic<int> calls{0};
  ScriptedServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  EndpointConfig c = config_for(server.base_url());
  c.max_retries = 2;
  auto gw = http_gateway(c);
  try {
    gw.complete(ask("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEndpointTransient);
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(Gateway, MalformedBodyIsNotRetried) {
  std::atomic<int> calls{0};
  ScriptedServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content("{\"nothing\":1}", "application/json");
  });
  auto gw = http_gateway(config_for(server.base_url()));
  try {
    gw.complete(ask("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedResponse);
  }
  EXPECT_EQ(calls.load(), 1);
}

TEST(Gateway, UnreachableEndpointIsTransient) {
  EndpointConfig c = config_for("http://127.0.0.1:1/v1");
  c.max_retries = 1;
  c.timeout = std::chrono::milliseconds(500);
  auto gw = http_gateway(c);
  try {
    gw.complete(ask("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEndpointTransient);
  }
}

TEST(Gateway, CacheShortCircuitsTheNetwork) {
  std::atomic<int> calls{0};
  ScriptedServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    reply(res, "Berlin");
  });
  EndpointConfig c = config_for(server.base_url());
  c.cache_dir = fresh_dir("cache");
  auto gw = http_gateway(c);
  const Prediction first = gw.complete(ask("q"));
  const Prediction second = gw.complete(ask("q"));
  EXPECT_FALSE(first.from_cache);
  EXPECT_TRUE(second.from_cache);
  EXPECT_EQ(second.attempt_count, 0);
  EXPECT_EQ(first.raw_text, second.raw_text);
  EXPECT_EQ(calls.load(), 1);

  auto again = http_gateway(c);
  EXPECT_TRUE(again.complete(ask("q")).from_cache);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Gateway, CacheKeyCoversModelMessagesTemperature) {
  const ChatRequest a{"m", ask("q"), 0.0};
  ChatRequest b = a;
  EXPECT_EQ(cache_key(a), cache_key(b));
  b.model = "n";
  EXPECT_NE(cache_key(a), cache_key(b));
  b = a;
  b.temperature = 0.5;
  EXPECT_NE(cache_key(a), cache_key(b));
  b = a;
  b.messages[1].content = "q2";
  EXPECT_NE(cache_key(a), cache_key(b));
  EXPECT_EQ(cache_key(a).size(), 64u);
}

TEST(Gateway, CacheRoundTripIsByteIdentical) {
  ResponseCache cache(fresh_dir("roundtrip"));
  const std::string text = "multi\nline \"quoted\" ünïcode\t";
  cache.put("k", text);
  EXPECT_EQ(cache.get("k"), text);
  EXPECT_FALSE(cache.get("missing"));
}

TEST(Gateway, BoundedConcurrency) {
  std::atomic<int> in_flight{0}, peak{0};
  ScriptedServer server([&](const httplib::Request& req, httplib::Response& res) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    --in_flight;
    reply(res, chat_request_from_wire(req.body).messages[1].content);
  });
  EndpointConfig c = config_for(server.base_url());
  c.max_concurrency = 8;
  auto gw = http_gateway(c);
  std::vector<BatchRequest> reqs;
  for (int i = 0; i < 100; ++i) reqs.push_back({"i" + std::to_string(i), ask("q" + std::to_string(i))});
  const auto results = gw.batch_complete(reqs);
  ASSERT_EQ(results.size(), 100u);
  for (int i = 0; i < 100; ++i) {
    ASSERT_TRUE(results[i].ok());
    EXPECT_EQ(results[i].item_id, "i" + std::to_string(i));
    EXPECT_EQ(results[i].prediction->raw_text, "q" + std::to_string(i));
  }
  EXPECT_LE(peak.load(), 8);
  EXPECT_GE(peak.load(), 2);
}

TEST(Gateway, EmptyBatch) {
  Gateway gw(EndpointConfig{}, std::make_shared<OracleTransport>([](const Messages&) { return "x"; }));
  EXPECT_TRUE(gw.batch_complete({}).empty());
}

TEST(Gateway, OneFailureAmongTen) {
  ScriptedServer server([&](const httplib::Request& req, httplib::Response& res) {
    const std::string q = chat_request_from_wire(req.body).messages[1].content;
    if (q == "q4") {
      res.status = 400;
      return;
    }
    reply(res, "a" + q);
  });
  auto gw = http_gateway(config_for(server.base_url()));
  std::vector<BatchRequest> reqs;
  for (int i = 0; i < 10; ++i) reqs.push_back({"i" + std::to_string(i), ask("q" + std::to_string(i))});
  const auto results = gw.batch_complete(reqs);
  ASSERT_EQ(results.size(), 10u);
  int ok = 0;
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(results[i].item_id, "i" + std::to_string(i));
    if (results[i].ok()) {
      ++ok;
      EXPECT_EQ(results[i].prediction->raw_text, "aq" + std::to_string(i));
    } else {
      EXPECT_EQ(i, 4);
      EXPECT_EQ(results[i].error_code, ErrorCode::kEndpointFatal);
    }
  }
  EXPECT_EQ(ok, 9);
}

TEST(Gateway, LogRecordsEveryExchange) {
  Gateway gw(EndpointConfig{}, std::make_shared<OracleTransport>([](const Messages& m) {
               return m[1].content == "bad" ? throw Error(ErrorCode::kEndpointFatal, "nope")
                                            : std::string("fine");
             }));
  auto log = std::make_shared<RequestLog>();
  gw.set_log(log);
  gw.batch_complete({{"a", ask("good")}, {"b", ask("bad")}});
  const auto entries = log->entries();
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].item_id, "a");
  EXPECT_TRUE(entries[0].prediction);
  EXPECT_EQ(entries[1].error, "nope");
  const std::string jsonl = log->to_jsonl();
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 2);
}

TEST(Gateway, InvalidConfig) {
  EndpointConfig c;
  c.max_concurrency = 0;
  EXPECT_THROW(c.validate(), Error);
  c.max_concurrency = 1;
  c.temperature = -1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(HttpTransport("no-scheme", "", std::chrono::milliseconds(10)), Error);
}

}  // namespace
}  // namespace chronoqa
