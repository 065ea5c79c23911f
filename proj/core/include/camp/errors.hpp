#pragma once

#include <stdexcept>
#include <string>

namespace camp {

// Argument outside the mathematical domain of an operation (e.g. a
// probability of exactly 1 passed to a quantile).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Caller violated an API contract: mismatched dimensions, empty input,
// stepping a finished episode.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace camp
