#pragma once

#include <stdexcept>
#include <string>

namespace wcedetect {

/// Bad arguments or violated preconditions (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing, malformed or mutually inconsistent data files (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wcedetect
