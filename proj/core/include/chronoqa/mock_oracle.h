#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "chronoqa/gateway.h"
#include "chronoqa/relations.h"
#include "chronoqa/types.h"

// Deterministic scripted endpoint. It reads the rendered prompt back with
// parse_prompt, so it answers exactly what a real model would be asked.
namespace chronoqa {

inline constexpr const char* kNoAnswer = "No answer";

enum class OraclePolicy { kAnswerKey, kYearSensitive, kFixedLabel };

const char* to_string(OraclePolicy policy);
std::optional<OraclePolicy> parse_policy(std::string_view name);
// "answer_key, year_sensitive, fixed_label"
std::string valid_policy_names();

// Lowercase word tokens of the question with its time reference removed.
// Questions that differ only in their time phrase share a key.
std::string question_key(std::string_view question);

struct KeyedAnswer {
  std::string answer;
  std::optional<YearSpan> span;  // absent: valid whatever the year
};

class AnswerKey {
 public:
  // An exact entry matches the whole question (case and whitespace
  // insensitive) and takes precedence over keyed entries.
  void add_qa(std::string_view question, std::string answer,
              std::optional<YearSpan> span = std::nullopt, bool exact = false);
  void add_claim(std::string_view claim, GoldLabel label);
  void add_event(std::string_view description, CalendarDate date);

  void add_items(const std::vector<QaItem>& items);
  // Forward answers scoped to the fact's span, inverse answers unscoped.
  void add_quads(const std::vector<TemporalQuadruple>& quads,
                 const RelationRegistry& registry);
  void add_claims(const std::vector<ClaimRecord>& claims);
  void add_events(const std::vector<EventRecord>& events);

  // The answer for a question asked about `year` (nullopt when the question
  // carries no absolute year). An entry whose span holds the year is
  // preferred; otherwise the first entry is used.
  std::optional<std::string> answer(std::string_view question,
                                    std::optional<int> year) const;
  const KeyedAnswer* exact(std::string_view question) const;
  const std::vector<KeyedAnswer>* keyed(std::string_view question) const;
  std::optional<GoldLabel> claim(std::string_view claim) const;
  std::optional<CalendarDate> event(std::string_view description) const;

  bool empty() const;

  // JSONL, one entry per line with a "kind" of qa, claim or event.
  static AnswerKey load(const std::filesystem::path& path);
  std::string to_jsonl() const;

 private:
  std::map<std::string, KeyedAnswer> exact_;
  std::map<std::string, std::vector<KeyedAnswer>> keyed_;
  std::map<std::string, GoldLabel> claims_;
  std::map<std::string, CalendarDate> events_;
};

using OracleFn = std::function<std::string(const Messages&)>;

struct OracleSpec {
  OraclePolicy policy = OraclePolicy::kAnswerKey;
  std::shared_ptr<const AnswerKey> key = std::make_shared<AnswerKey>();
  std::string fixed_label = "True";
};

// answer_key: every task answered from the key, whatever the phrasing.
// year_sensitive: QA answered only when the question names a year inside
//   the entry's span; other tasks as answer_key.
// fixed_label: the fixed text for every prompt.
// Unknown items yield "No answer".
std::string mock_oracle(const OracleSpec& spec, const Messages& messages);
OracleFn make_oracle(OracleSpec spec);

// In-process transport, no sockets.
class OracleTransport : public Transport {
 public:
  explicit OracleTransport(OracleFn fn) : fn_(std::move(fn)) {}
  std::string send(const ChatRequest& request) override { return fn_(request.messages); }

 private:
  OracleFn fn_;
};

// Serves POST /v1/chat/completions and /chat/completions on 127.0.0.1.
class MockServer {
 public:
  // port 0 picks a free port. A non-empty api_key makes other bearer
  // tokens fail with 401. Throws Error(kConfig) if the port is taken.
  MockServer(OracleFn fn, int port = 0, std::string api_key = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const;
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace chronoqa
