#pragma once

#include <stdexcept>
#include <string>

namespace sketchconn {

enum class ErrorCode {
  kInvalidEdge,
  kInvalidIndex,
  kConfigMismatch,
  kWrongList,
  kCorruption,
  kIllegalLink,
  kIllegalCut,
  kNoPath,
  kUnsupported,
  kInvalidConfig,
  kInvalidQuery,
  kStreamViolation,
  kFormat,
  kIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidEdge: return "invalid-edge";
    case ErrorCode::kInvalidIndex: return "invalid-index";
    case ErrorCode::kConfigMismatch: return "config-mismatch";
    case ErrorCode::kWrongList: return "wrong-list";
    case ErrorCode::kCorruption: return "corruption";
    case ErrorCode::kIllegalLink: return "illegal-link";
    case ErrorCode::kIllegalCut: return "illegal-cut";
    case ErrorCode::kNoPath: return "no-path";
    case ErrorCode::kUnsupported: return "unsupported-operation";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kInvalidQuery: return "invalid-query";
    case ErrorCode::kStreamViolation: return "stream-violation";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sketchconn
