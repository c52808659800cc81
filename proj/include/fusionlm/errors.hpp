#pragma once

#include <stdexcept>
#include <string>

namespace fusionlm {

// Error categories map onto CLI exit codes: usage/config errors exit 1,
// data errors exit 2, numeric failures exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : UsageError {
  using UsageError::UsageError;
};

struct DimensionError : DataError {
  using DataError::DataError;
};

struct IndexError : DataError {
  using DataError::DataError;
};

}  // namespace fusionlm
