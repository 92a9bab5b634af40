#ifndef DPPDYN_ERRORS_HPP
#define DPPDYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dppdyn {

/// Invalid input: bad construction arguments, malformed config, violated
/// preconditions. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A request that would enumerate more than 2^limit configurations.
class EnumerationLimitError : public ValidationError {
public:
  EnumerationLimitError(int n, int limit)
      : ValidationError("state-space enumeration requires n <= " +
                        std::to_string(limit) + ", got n = " +
                        std::to_string(n)) {}
};

/// Numerical breakdown: loss of positive semidefiniteness, near-singular
/// intensity, rate overflow. Maps to CLI exit code 3.
class NumericalAbort : public std::runtime_error {
public:
  explicit NumericalAbort(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dppdyn

#endif
