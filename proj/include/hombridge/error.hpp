#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hombridge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is the 0-based character offset of
/// the offending token (equal to the text length at end of input).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Expression rejected after parsing (f(0) != 0, non-finite f'(0), unknown identifier).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Evaluation produced a non-finite value (overflow, division by zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Wave speed outside 0 < c^4 < 4 f'(0).
class InadmissibleSpeed : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on an argument (bad grid size, empty interval, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hombridge
