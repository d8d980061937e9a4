#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace ess {

using Index = Eigen::Index;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (bad grid, bad alpha, incompatible loss).
struct InvalidInputError : Error {
  using Error::Error;
};

/// Dataset-level problems: schema violations, parse failures, missing columns.
struct DataError : Error {
  using Error::Error;
};

/// Numeric failures: optimizer non-convergence, degenerate experiment configs.
struct NumericError : Error {
  using Error::Error;
};

inline const char* version() { return "0.1.0"; }

}  // namespace ess
