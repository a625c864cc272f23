#pragma once

#include <stdexcept>
#include <string>

namespace filterlab {

/// Shape or structure of an input does not fit (dimensions, probability rows, indices).
class StructuralError : public std::invalid_argument {
 public:
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// A parameter or setting is missing or out of range.
class ConfigurationError : public std::invalid_argument {
 public:
  explicit ConfigurationError(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

void log_warning(const std::string& message);

}  // namespace filterlab
