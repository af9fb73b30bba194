#pragma once

#include <stdexcept>
#include <string>

namespace fmest {

// Precondition on a numeric parameter violated (theta outside (0,1), K < 2, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Machine tables reference states that do not exist, or a composed machine
// lacks the class structure an analysis depends on.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver could not certify its answer; carries the offending residual.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Malformed machine document. `field()` names the offending entry.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fmest
