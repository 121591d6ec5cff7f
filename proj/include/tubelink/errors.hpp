#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tubelink {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that violates a type invariant or the interchange schema.
// `line` is the 1-based record line, or 0 when not tied to a file.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SyntaxError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ScoreLengthError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class DegenerateBoxError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class FrameOrderError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class EmptyFrameError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace tubelink
