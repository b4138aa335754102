#pragma once

#include <stdexcept>
#include <string>

namespace argseek {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed rule/fact/manifest text. The message names the offending line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input references something outside the declared atom universe, or
// parameters are inconsistent with each other.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A search exceeded a configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (repeated action, empty legal set...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace argseek
