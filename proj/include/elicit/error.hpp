#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

// Base of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV, JSON). Carries the 1-based row when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0)
      : Error(row ? what + " (row " + std::to_string(row) + ")" : what),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Input is well-formed but violates a domain rule (single class, bad epsilon).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// The request conflicts with the current state (stale query, wrong phase).
class Rejected : public Error {
 public:
  using Error::Error;
};

}  // namespace elicit
