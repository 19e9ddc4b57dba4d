#pragma once

#include <stdexcept>
#include <string>

namespace bpswall {

/// Base of every error raised by the solver.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or run parameters (e.g. beta outside [0, 4)).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// The wall equation was evaluated outside its domain of validity.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadrature could not meet its requested tolerance.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size underflowed.
class StepFailure : public Error {
 public:
  using Error::Error;
};

/// A slope classification contradicts the current bisection bracket.
class BracketInconsistency : public Error {
 public:
  using Error::Error;
};

/// Doubling the trial slope never produced an overshooting trajectory.
class NoUpperBracket : public Error {
 public:
  using Error::Error;
};

/// A profile does not extend far enough to fit an asymptotic tail.
class InsufficientTail : public Error {
 public:
  using Error::Error;
};

/// u0 = 0 was requested for a magnetic-to-magnetic wall.
class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bpswall
