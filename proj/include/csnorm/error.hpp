#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csnorm {

// Base class for every error raised by the library. The CLI maps these to
// exit code 2 (data error).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number when known.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Invalid argument to an operation (precondition violated).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Persisted model or resource bundle failed an integrity check.
class IntegrityError : public Error {
public:
  using Error::Error;
};

}  // namespace csnorm
