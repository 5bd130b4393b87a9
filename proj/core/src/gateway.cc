#include "chronoqa/gateway.h"

#include <openssl/evp.h>

#include <fstream>
#include <thread>

#include <json.hpp>

#include "chronoqa/corpus.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

ojson messages_json(const Messages& messages) {
  ojson arr = ojson::array();
  for (const auto& m : messages) {
    ojson o;
    o["role"] = m.role;
    o["content"] = m.content;
    arr.push_back(std::move(o));
  }
  return arr;
}

ojson request_json(const ChatRequest& r) {
  ojson j;
  j["model"] = r.model;
  j["messages"] = messages_json(r.messages);
  j["temperature"] = r.temperature;
  return j;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace

void EndpointConfig::validate() const {
  if (max_concurrency < 1) throw Error(ErrorCode::kConfig, "max_concurrency must be >= 1");
  if (temperature < 0) throw Error(ErrorCode::kConfig, "temperature must be >= 0");
  if (max_retries < 0) throw Error(ErrorCode::kConfig, "max_retries must be >= 0");
}

std::string to_wire_json(const ChatRequest& request) { return request_json(request).dump(); }

ChatRequest chat_request_from_wire(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    ChatRequest r;
    r.model = j.value("model", std::string());
    r.temperature = j.value("temperature", 0.0);
    for (const auto& m : j.at("messages")) {
      r.messages.push_back({m.at("role").get<std::string>(),
                            m.at("content").get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("bad request body: ") + e.what());
  }
}

std::string completion_to_wire_json(std::string_view model, std::string_view content) {
  ojson message;
  message["role"] = "assistant";
  message["content"] = content;
  ojson choice;
  choice["index"] = 0;
  choice["message"] = std::move(message);
  choice["finish_reason"] = "stop";
  ojson j;
  j["id"] = "chatcmpl-chronoqa";
  j["object"] = "chat.completion";
  j["model"] = model;
  j["choices"] = ojson::array({std::move(choice)});
  return j.dump();
}

std::string completion_from_wire(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw Error(ErrorCode::kMalformedResponse, "completion content is not a string");
    }
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse,
                std::string("malformed response body: ") + e.what());
  }
}

std::string cache_key(const ChatRequest& request) {
  return sha256_hex(request_json(request).dump());
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const fs::path p = dir_ / (key + ".json");
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    return j.at("raw_text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const std::string& raw_text) {
  std::unique_lock lock(mutex_);
  ojson j;
  j["key"] = key;
  j["raw_text"] = raw_text;
  const fs::path final_path = dir_ / (key + ".json");
  const fs::path tmp = dir_ / (key + ".json.tmp");
  write_text_file(tmp, j.dump());
  fs::rename(tmp, final_path);
}

void RequestLog::append(LogEntry entry) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
}

std::vector<LogEntry> RequestLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::string RequestLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries()) {
    ojson j;
    j["item_id"] = e.item_id;
    j["request"] = request_json(e.request);
    if (e.prediction) {
      j["raw_text"] = e.prediction->raw_text;
      j["from_cache"] = e.prediction->from_cache;
      j["attempt_count"] = e.prediction->attempt_count;
      j["latency_ms"] = e.prediction->latency.count();
    }
    if (e.error) j["error"] = *e.error;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void RequestLog::write(const fs::path& path) const { write_text_file(path, to_jsonl()); }

Gateway::Gateway(EndpointConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) throw Error(ErrorCode::kConfig, "gateway needs a transport");
  if (config_.cache_dir) cache_ = std::make_unique<ResponseCache>(*config_.cache_dir);
}

Prediction Gateway::complete_unlogged(const ChatRequest& request,
                                      const std::string& item_id) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
  };
  std::string key;
  if (cache_) {
    key = cache_key(request);
    if (auto hit = cache_->get(key)) {
      return Prediction{item_id, std::move(*hit), elapsed(), 0, true};
    }
  }
  int attempt = 0;
  auto backoff = config_.initial_backoff;
  while (true) {
    ++attempt;
    try {
      std::string text = transport_->send(request);
      // Verbatim apart from trailing whitespace.
      while (!text.empty() && (text.back() == ' ' || text.back() == '\n' ||
                               text.back() == '\t' || text.back() == '\r')) {
        text.pop_back();
      }
      if (cache_) cache_->put(key, text);
      return Prediction{item_id, std::move(text), elapsed(), attempt, false};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEndpointTransient) throw;
      if (attempt > config_.max_retries) {
        throw Error(ErrorCode::kEndpointTransient,
                    "retries exhausted after " + std::to_string(attempt) +
                        " attempts: " + e.what());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

Prediction Gateway::complete(const Messages& messages, const std::string& item_id) {
  ChatRequest request{config_.model_name, messages, config_.temperature};
  try {
    Prediction p = complete_unlogged(request, item_id);
    if (log_) log_->append({item_id, request, p, std::nullopt});
    return p;
  } catch (const Error& e) {
    if (log_) log_->append({item_id, request, std::nullopt, std::string(e.what())});
    throw;
  }
}

std::vector<BatchResult> Gateway::batch_complete(const std::vector<BatchRequest>& requests) {
  std::vector<BatchResult> results(requests.size());
  if (requests.empty()) return results;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      const auto& req = requests[i];
      BatchResult& out = results[i];
      out.item_id = req.item_id;
      try {
        out.prediction = complete_unlogged(
            ChatRequest{config_.model_name, req.messages, config_.temperature}, req.item_id);
      } catch (const Error& e) {
        out.error = e.what();
        out.error_code = e.code();
      } catch (const std::exception& e) {
        out.error = e.what();
        out.error_code = ErrorCode::kEndpointFatal;
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config_.max_concurrency), requests.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (log_) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      log_->append({requests[i].item_id,
                    ChatRequest{config_.model_name, requests[i].messages, config_.temperature},
                    results[i].prediction, results[i].error});
    }
  }
  return results;
}

}  // namespace chronoqa
