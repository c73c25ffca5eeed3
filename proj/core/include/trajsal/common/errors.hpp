#pragma once

#include <stdexcept>
#include <string>

namespace trajsal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf reached a kernel boundary, or an optimizer failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a precondition (too short, malformed file, bad range).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed record in a text file; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace trajsal
