#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sps {

enum class ErrorCode {
  dimension_mismatch,
  invalid_argument,
  non_finite,
  index_out_of_range,
  singular_system,
  configuration,
  exact_unavailable,
  not_converged,
  resample_exhausted,
  parse,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::exact_unavailable: return "exact_unavailable";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::resample_exhausted: return "resample_exhausted";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Every library failure is reported through this type; `code()` is stable
/// and suitable for programmatic handling, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace sps
