#pragma once

#include <stdexcept>

namespace linkbench {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input-data problems: missing files, malformed lines, dangling references.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace linkbench
