#ifndef CASCADE_ERRORS_H_
#define CASCADE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cascade {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (corpus line, schema, checkpoint header).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed input that violates a schema or data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad argument to an operation (ratios, out-of-range spans, unknown roles).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration key or value, infeasible generator config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input longer than the configured maximum sequence length.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// A file that cannot be opened for reading or writing.
class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade

#endif  // CASCADE_ERRORS_H_
