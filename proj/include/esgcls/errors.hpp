#pragma once

#include <stdexcept>
#include <string>

namespace esgcls {

/// Invalid configuration (bad option values, malformed run configs).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent input data (malformed files, broken invariants).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model training failed (degenerate inputs, non-finite values).
class TrainError : public std::runtime_error {
 public:
  explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace esgcls
