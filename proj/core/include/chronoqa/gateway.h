#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "chronoqa/error.h"
#include "chronoqa/prompts.h"

namespace chronoqa {

struct EndpointConfig {
  std::string base_url;  // requests go to <base_url>/chat/completions
  std::string model_name = "mock";
  std::string api_key;
  int max_concurrency = 4;
  std::chrono::milliseconds timeout{60000};
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::optional<std::filesystem::path> cache_dir;

  // Throws Error(kConfig) when max_concurrency < 1, temperature < 0 or
  // max_retries < 0.
  void validate() const;
};

struct ChatRequest {
  std::string model;
  Messages messages;
  double temperature = 0.0;
};

// Wire body {model, messages: [{role, content}], temperature}.
std::string to_wire_json(const ChatRequest& request);
ChatRequest chat_request_from_wire(std::string_view body);
// Response body with the completion at choices[0].message.content.
std::string completion_to_wire_json(std::string_view model, std::string_view content);
std::string completion_from_wire(std::string_view body);

struct Prediction {
  std::string item_id;
  std::string raw_text;
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;  // 0 for cache hits
  bool from_cache = false;
};

// One exchange with an endpoint. Implementations throw Error with
// kEndpointTransient, kEndpointFatal or kMalformedResponse.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string send(const ChatRequest& request) = 0;
};

// chat-completions over HTTP(S).
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, std::string api_key,
                std::chrono::milliseconds timeout);
  std::string send(const ChatRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// SHA-256 over the canonical (model, messages, temperature) encoding.
std::string cache_key(const ChatRequest& request);

// One file per key under a directory. Concurrent readers, serialized
// writers; writes are atomic renames.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& raw_text);

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

struct LogEntry {
  std::string item_id;
  ChatRequest request;
  std::optional<Prediction> prediction;
  std::optional<std::string> error;
};

// Request/response log persisted per run as JSONL.
class RequestLog {
 public:
  void append(LogEntry entry);
  std::vector<LogEntry> entries() const;
  std::string to_jsonl() const;
  void write(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mutex_;
  std::vector<LogEntry> entries_;
};

struct BatchRequest {
  std::string item_id;
  Messages messages;
};

struct BatchResult {
  std::string item_id;
  std::optional<Prediction> prediction;
  std::optional<std::string> error;
  std::optional<ErrorCode> error_code;

  bool ok() const { return prediction.has_value(); }
};

class Gateway {
 public:
  Gateway(EndpointConfig config, std::shared_ptr<Transport> transport);

  // Cache lookup, then up to 1 + max_retries attempts with exponential
  // backoff on transient failures. Fatal and malformed-response errors are
  // not retried.
  Prediction complete(const Messages& messages, const std::string& item_id = {});

  // Results in input order; at most max_concurrency requests in flight.
  // Per-item failures are reported in the result, never thrown.
  std::vector<BatchResult> batch_complete(const std::vector<BatchRequest>& requests);

  const EndpointConfig& config() const { return config_; }
  void set_log(std::shared_ptr<RequestLog> log) { log_ = std::move(log); }
  const std::shared_ptr<RequestLog>& log() const { return log_; }

 private:
  Prediction complete_unlogged(const ChatRequest& request, const std::string& item_id);

  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<ResponseCache> cache_;
  std::shared_ptr<RequestLog> log_;
};

}  // namespace chronoqa
