#ifndef NKLON_ERRORS_HPP
#define NKLON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nklon {

// Exit codes used by the CLI. Anything else maps to 1.
enum ExitCode : int {
  kExitOk = 0,
  kExitParameter = 2,
  kExitCapacity = 3,
  kExitConvergence = 4,
};

// Invalid user-supplied parameters (bad model spec, malformed flags).
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed instance document; message carries the offending field path.
struct ParseError : ParameterError {
  explicit ParseError(const std::string& msg) : ParameterError(msg) {}
};

// Problem size exceeds the enumeration budget.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solve failed to reach the target residual.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inputs that are individually valid but mutually inconsistent
// (e.g. a basin distribution paired with the wrong partition).
struct ConsistencyError : std::runtime_error {
  explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nklon

#endif
