#pragma once

#include <stdexcept>
#include <string>

namespace gdg {

/// Caller broke a precondition: wrong dimensions, empty batch, bad config.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss or gradient went non-finite. The offending update is not applied.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment or configuration admits no valid sample (e.g. no free space).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gdg
