#pragma once

#include <stdexcept>
#include <string>

namespace dlo {

// Error categories; mirrored one-to-one by the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  VersionMismatch = 3,
  DimensionMismatch = 4,
  CorruptPayload = 5,
  DivergedSimulation = 6,
  DivergedTraining = 7,
  RunAborted = 8,
  BadConfig = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::CorruptPayload: return "corrupt_payload";
    case ErrorCode::DivergedSimulation: return "diverged_simulation";
    case ErrorCode::DivergedTraining: return "diverged_training";
    case ErrorCode::RunAborted: return "run_aborted";
    case ErrorCode::BadConfig: return "bad_config";
  }
  return "unknown";
}

}  // namespace dlo
