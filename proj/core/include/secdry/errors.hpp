#ifndef SECDRY_ERRORS_HPP
#define SECDRY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace secdry {

/// Machine-readable failure categories; the CLI maps these to exit codes.
enum class ErrorCategory {
  invalid_parameter,  // precondition on inputs violated
  invalid_state,      // non-finite or otherwise unusable state vector
  shape_mismatch,     // measurement/gain shapes inconsistent
  step_failure,       // integrator could not meet tolerance
  not_reached,        // event (e.g. drying threshold) not attained in horizon
  decomposition,      // eigendecomposition failed or is unusable
  degenerate,         // quantity undefined (e.g. zero eigenvalue time constant)
  parse,              // config/CSV syntax error
  validation,         // config parsed but violates invariants
  io,                 // file system failure
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(to_string(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_parameter: return "invalid-parameter";
    case ErrorCategory::invalid_state: return "invalid-state";
    case ErrorCategory::shape_mismatch: return "shape-mismatch";
    case ErrorCategory::step_failure: return "step-failure";
    case ErrorCategory::not_reached: return "not-reached";
    case ErrorCategory::decomposition: return "decomposition-failure";
    case ErrorCategory::degenerate: return "degenerate";
    case ErrorCategory::parse: return "parse-error";
    case ErrorCategory::validation: return "validation-error";
    case ErrorCategory::io: return "io-error";
  }
  return "unknown";
}

}  // namespace secdry

#endif  // SECDRY_ERRORS_HPP
