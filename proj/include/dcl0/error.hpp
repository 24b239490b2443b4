#pragma once

#include <stdexcept>
#include <string>

namespace dcl0 {

// Base of every error thrown by the library. what() is a single line so the
// CLI can forward it verbatim after an "error: " prefix.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter outside its admissible range (bad penalty spec, negative
// weight, mismatched dimensions, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Operation called with a penalty kind it does not support (e.g. eta() on PiL).
class UnsupportedKind : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The simplex hit a pivot too small to trust.
class DegeneratePivot : public Error {
 public:
  using Error::Error;
};

// A numerical check on a solver result failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A request the library refuses by policy (oracle on too many features, ...).
class Refused : public Error {
 public:
  using Error::Error;
};

}  // namespace dcl0
