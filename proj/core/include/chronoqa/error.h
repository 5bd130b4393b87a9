#pragma once

#include <stdexcept>
#include <string>

namespace chronoqa {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCode {
  kConfig,              // bad flags, unparseable config, invalid parameters
  kData,                // missing/empty/malformed dataset files
  kPrecondition,        // an operation's input does not meet its contract
  kEndpointTransient,   // retryable endpoint failure (429, 5xx, timeout)
  kEndpointFatal,       // authentication or other non-retryable failure
  kMalformedResponse,   // endpoint replied but the body is unusable
  kUnparseableVerdict,  // judge output is neither yes nor no
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chronoqa
