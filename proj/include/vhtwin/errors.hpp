#pragma once

#include <stdexcept>
#include <string>

namespace vhtwin {

/// Invalid configuration or misuse detected before any computation starts.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data could not be read or parsed.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss; carries the epoch where it happened.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch_index)
      : std::runtime_error(what), epoch(epoch_index) {}
  int epoch;
};

}  // namespace vhtwin
