#pragma once

#include <stdexcept>
#include <string>

namespace algoseek {

// Base for every failure raised by the library. The CLI maps these to exit
// code 3 (data error) unless the concrete type is UsageError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation or configuration (unknown config key, malformed value).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace algoseek
