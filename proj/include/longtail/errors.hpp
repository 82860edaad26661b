#pragma once

#include <stdexcept>
#include <string>

namespace longtail {

/// Bad run configuration (unknown key, missing seed, out-of-range value).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV schema, duplicates, empty result).
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (factorization breakdown, quadrature non-convergence,
/// non-finite startup posterior).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Diagnostics cannot be computed (too few chains, unequal chain lengths).
struct diagnostics_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace longtail
