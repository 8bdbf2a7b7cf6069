#pragma once

#include <stdexcept>
#include <string>

namespace bsbm {

// Parameter or flag combination outside the model's domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The operator handed to an eigensolver is numerically zero.
class ZeroOperator : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimator cannot produce labels for this input (e.g. an empty graph).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoTransitionFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bsbm
