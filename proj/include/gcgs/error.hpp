#pragma once

#include <stdexcept>
#include <string>

namespace gcgs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A callback returned a NaN or infinite value.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& what, double at)
      : Error(what), at_(at) {}
  double at() const noexcept { return at_; }

private:
  double at_;
};

/// Argument outside the domain of a function (log of zero, bad shapes, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// An iterative method ran out of iterations before reaching its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Backtracking could not find an acceptable step.
class StallError : public Error {
public:
  using Error::Error;
};

/// Transportation simplex exceeded its pivot budget.
class DegeneracyError : public Error {
public:
  using Error::Error;
};

/// Failure inside the per-iteration subproblem solver.
class OracleError : public Error {
public:
  OracleError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

/// Malformed input file.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

}  // namespace gcgs
