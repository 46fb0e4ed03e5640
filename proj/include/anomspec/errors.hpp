#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anomspec {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (empty input, bad dimension...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed text input. line() is 1-based; 0 when no line applies.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Full specification was refused because the cell count grows as O(c^n).
class IntractableDimensionality : public Error {
 public:
  using Error::Error;
};

}  // namespace anomspec
