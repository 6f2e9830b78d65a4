#pragma once

#include <stdexcept>

namespace kfrev {

/// Input data is missing, corrupt or inconsistent.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Remote download failed after retries, or returned nothing usable.
class FetchError : public DataError {
 public:
  using DataError::DataError;
};

/// Filter model is malformed or the recursion became numerically invalid.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration rejected during validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kfrev
