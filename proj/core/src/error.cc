#include "chronoqa/error.h"

namespace chronoqa {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kData:
      return "data";
    case ErrorCode::kPrecondition:
      return "precondition";
    case ErrorCode::kEndpointTransient:
      return "endpoint-transient";
    case ErrorCode::kEndpointFatal:
      return "endpoint-fatal";
    case ErrorCode::kMalformedResponse:
      return "malformed-response";
    case ErrorCode::kUnparseableVerdict:
      return "unparseable-verdict";
  }
  return "unknown";
}

}  // namespace chronoqa
