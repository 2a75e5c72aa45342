#pragma once

#include <stdexcept>
#include <string>

namespace simpson {

// Malformed arguments, specs, or parameters supplied by the caller.
class InvalidInput : public std::invalid_argument {
  public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Problems found in ingested data (CSV contents, record streams).
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A rate was requested for an arm with a zero denominator.
class UndefinedRate : public std::runtime_error {
  public:
    explicit UndefinedRate(const std::string& what) : std::runtime_error(what) {}
};

// Count arithmetic left the 64-bit range. Never wraps silently.
class CountOverflow : public std::runtime_error {
  public:
    explicit CountOverflow(const std::string& what) : std::runtime_error(what) {}
};

} // namespace simpson
