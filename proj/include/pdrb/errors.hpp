#pragma once

#include <stdexcept>
#include <string>

namespace pdrb {

/// Failure categories surfaced by the library. Callers that need to react
/// differently (e.g. rank deficiency vs. slow convergence) switch on these.
enum class ErrorCode {
  invalid_argument,
  index_out_of_range,
  non_convergence,
  rank_deficient,
  generation_mismatch,
  infeasible_lifting,
  trace_not_representable,
  singular_reduced_system,
  parse_error,
  version_mismatch,
  io_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::generation_mismatch: return "generation_mismatch";
    case ErrorCode::infeasible_lifting: return "infeasible_lifting";
    case ErrorCode::trace_not_representable: return "trace_not_representable";
    case ErrorCode::singular_reduced_system: return "singular_reduced_system";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define PDRB_THROW_IF(cond, code, msg)                 \
  do {                                                 \
    if (cond) throw ::pdrb::Error((code), (msg));      \
  } while (false)

}  // namespace pdrb
