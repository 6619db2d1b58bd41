#pragma once

#include <stdexcept>
#include <string>

namespace cocycle_lab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class FiberMismatch : public Error {
public:
  using Error::Error;
};

class BadWitness : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NoMetric : public Error {
public:
  using Error::Error;
};

class CocycleDefect : public Error {
public:
  CocycleDefect(double defect, double tol)
      : Error("cocycle defect " + std::to_string(defect) + " exceeds tolerance " +
              std::to_string(tol)),
        defect_(defect) {}
  double defect() const noexcept { return defect_; }

private:
  double defect_;
};

/// The potential is not a coboundary; carries the obstruction (a cycle sum).
class NotACoboundary : public Error {
public:
  NotACoboundary(double cycle_sum, std::size_t cycle_start)
      : Error("not a coboundary: cycle through " + std::to_string(cycle_start) +
              " sums to " + std::to_string(cycle_sum)),
        cycle_sum_(cycle_sum),
        cycle_start_(cycle_start) {}
  double cycle_sum() const noexcept { return cycle_sum_; }
  std::size_t cycle_start() const noexcept { return cycle_start_; }

private:
  double cycle_sum_;
  std::size_t cycle_start_;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class ParamError : public Error {
public:
  using Error::Error;
};

}  // namespace cocycle_lab
