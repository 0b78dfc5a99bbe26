#pragma once

#include <stdexcept>
#include <string>

namespace gbergomi {

// Numerical failures (series caps, overflow, factorization breakdown) stay
// distinct from argument errors so the CLI can map them to exit code 1
// while bad input maps to 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a series hits its term cap; carries the partial sum so a
// caller that wants to limp on can.
struct NonConvergence : NumericalError {
  NonConvergence(const std::string& msg, double partial_sum)
      : NumericalError(msg), partial(partial_sum) {}
  double partial;
};

struct CholeskyError : NumericalError {
  CholeskyError(const std::string& msg, int minor)
      : NumericalError(msg), minor_index(minor) {}
  int minor_index;  // first non-positive leading minor, 0-based
};

}  // namespace gbergomi
