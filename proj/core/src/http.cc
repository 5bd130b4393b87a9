#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "chronoqa/error.h"
#include "chronoqa/gateway.h"
#include "chronoqa/mock_oracle.h"

namespace chronoqa {

HttpTransport::HttpTransport(std::string base_url, std::string api_key,
                             std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  if (base_url.empty()) throw Error(ErrorCode::kConfig, "endpoint base_url is empty");
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfig, "base_url needs a scheme: " + base_url);
  }
  const auto path_begin = base_url.find('/', scheme_end + 3);
  scheme_host_port_ = base_url.substr(0, path_begin);
  if (path_begin != std::string::npos) path_prefix_ = base_url.substr(path_begin);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpTransport::send(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const auto res = client.Post(path_prefix_ + "/chat/completions", headers,
                               to_wire_json(request), "application/json");
  if (!res) {
    throw Error(ErrorCode::kEndpointTransient,
                "connection failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 200) return completion_from_wire(res->body);
  const std::string what = "HTTP " + std::to_string(status) + " from endpoint";
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::kEndpointFatal, what + " (authentication failed)");
  }
  if (status == 429 || status == 408 || status >= 500) {
    throw Error(ErrorCode::kEndpointTransient, what);
  }
  throw Error(ErrorCode::kEndpointFatal, what);
}

struct MockServer::Impl {
  httplib::Server server;
};

MockServer::MockServer(OracleFn fn, int port, std::string api_key)
    : impl_(std::make_unique<Impl>()) {
  auto handler = [fn = std::move(fn), api_key = std::move(api_key)](
                     const httplib::Request& req, httplib::Response& res) {
    if (!api_key.empty() && req.get_header_value("Authorization") != "Bearer " + api_key) {
      res.status = 401;
      res.set_content(R"({"error":{"message":"invalid api key"}})", "application/json");
      return;
    }
    ChatRequest chat;
    try {
      chat = chat_request_from_wire(req.body);
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(std::string(R"({"error":{"message":"bad request"}})"),
                      "application/json");
      return;
    }
    res.set_content(completion_to_wire_json(chat.model, fn(chat.messages)),
                    "application/json");
  };
  impl_->server.Post("/v1/chat/completions", handler);
  impl_->server.Post("/chat/completions", handler);
  // httplib's default adds SO_REUSEPORT, which would let a second server share the port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (impl_->server.bind_to_port("127.0.0.1", port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::kConfig, "cannot bind 127.0.0.1:" + std::to_string(port) +
                                        " (port in use?)");
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockServer::~MockServer() {
  stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
}

void MockServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void MockServer::stop() { impl_->server.stop(); }

}  // namespace chronoqa
