#pragma once

#include <stdexcept>
#include <string>

namespace discwalk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an input contract.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to be positive semidefinite has a clearly negative eigenvalue.
class NotPSD : public Error {
 public:
  using Error::Error;
};

/// Potential-increase bound requested for a step outside its admissible range.
class StepTooLarge : public Error {
 public:
  using Error::Error;
};

/// A walk's admissible direction set became empty.
class SubspaceExhausted : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace discwalk
