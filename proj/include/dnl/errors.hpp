#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnl {

/// Input data failed validation (non-finite samples, malformed series).
class invalid_data : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric evaluation produced a non-finite intermediate.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what, std::ptrdiff_t element = -1)
      : std::runtime_error(what), element_index(element) {}
  std::ptrdiff_t element_index;  // offending element, -1 when not element-local
};

/// A documented precondition did not hold at the call site.
class precondition_error : public std::runtime_error {
 public:
  explicit precondition_error(const std::string& what, std::ptrdiff_t location = -1)
      : std::runtime_error(what), location_index(location) {}
  std::ptrdiff_t location_index;  // node or sample index, -1 when not applicable
};

/// The shooting oracle failed to bracket or certify an eigenpair.
class oracle_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file could not be parsed or validated.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnl
