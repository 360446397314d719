#pragma once

#include <stdexcept>
#include <string>

namespace stylo {

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration. The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure produced NaN/Inf (e.g. a learning rate that diverges).
class NumericError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace stylo
