#pragma once

#include <stdexcept>
#include <string>

namespace hetcause {

// Base of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or configuration (maps to CLI exit code 2).
class config_error : public error {
 public:
  using error::error;
};

// Input data that cannot be analysed as given (maps to CLI exit code 3).
class data_error : public error {
 public:
  using error::error;
};

}  // namespace hetcause
