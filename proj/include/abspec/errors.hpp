#pragma once

#include <stdexcept>
#include <string>

namespace abspec {

// Malformed input document/config/archive. The message names the
// offending field or file.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Semantically invalid data at run time: missing files, bad RRID syntax,
// datasets that violate their contract.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace abspec
