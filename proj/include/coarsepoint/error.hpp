#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coarsepoint {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (non-positive sigma, delta outside [0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Inputs that disagree with each other: misaligned annotations, unknown
/// image ids, scores outside [0,1].
class DataError : public Error {
 public:
  using Error::Error;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

class AssignmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed record file line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit SchemaError(const std::string& what) : Error(what), line_(0) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// External estimator failed: nonzero exit, timeout, unreadable output.
class BridgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarsepoint
