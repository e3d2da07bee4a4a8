#pragma once

#include <stdexcept>
#include <string>

namespace chosim {

/// Raised for malformed or inconsistent configuration (scenario file, sweep
/// file, or programmatically built configs that violate their invariants).
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a simulation run or output stage fails after configuration
/// was accepted (I/O errors, missing result coverage).
class RuntimeError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace chosim
