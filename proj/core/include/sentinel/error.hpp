#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

/// Invalid configuration or precondition violation detected before processing.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system or stream failure at runtime.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sentinel
